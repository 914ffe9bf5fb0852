//! Command-line surface of the msss toolkit.
//!
//! Every subcommand is a thin wrapper over the library: the dealer commands
//! hold a lock on the board while they rewrite it, the participant and
//! combiner commands only read it.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use msss::combiner::{reconstruct, unmask_and_recover, verify_contribution, verify_secret};
use msss::dealer::{setup, setup_from_primes, setup_with_generator};
use msss::{
    AccessStructure, Board, Contribution, DealerState, EmptyStructurePolicy, Error,
    ParticipantId, ParticipantKey, SecretId, ShareDraws,
};
use num_bigint::BigUint;
use num_traits::Num;
use rand::rngs::StdRng;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub mod files;
pub mod sim;

use files::{create_json, read_json, write_json, BoardLock};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{} already exists (pass --force to replace a board)", .0.display())]
    Exists(PathBuf),
    #[error("{} is held by another dealer process", .0.display())]
    Locked(PathBuf),
    #[error("recovered secret does not match the published tag")]
    TagMismatch,
    #[error("{0}")]
    Usage(String),
}

/// Process exit codes. Success is 0 and clap reports usage errors with 2.
pub mod exit {
    pub const IO: u8 = 3;
    pub const MALFORMED: u8 = 4;
    pub const INVARIANT: u8 = 5;
    pub const PARAMETER: u8 = 6;
    pub const ARITHMETIC: u8 = 7;
    pub const USAGE: u8 = 8;
    pub const EXISTS: u8 = 10;
    pub const LOCKED: u8 = 11;
    pub const DUPLICATE_PARTICIPANT: u8 = 12;
    pub const UNKNOWN_PARTICIPANT: u8 = 13;
    pub const UNKNOWN_SECRET: u8 = 14;
    pub const SECRET_TOO_LARGE: u8 = 15;
    pub const NOT_ANTICHAIN: u8 = 16;
    pub const EMPTY_STRUCTURE: u8 = 17;
    pub const INDEX_OUT_OF_RANGE: u8 = 18;
    pub const LAST_ENTRY: u8 = 19;
    pub const STRUCTURE_BECAME_EMPTY: u8 = 20;
    pub const NOT_A_MEMBER: u8 = 21;
    pub const MISSING_CONTRIBUTION: u8 = 22;
    pub const EXTRA_CONTRIBUTION: u8 = 23;
    pub const BAD_CONTRIBUTION: u8 = 24;
    pub const UNMASK_OUT_OF_FIELD: u8 = 25;
    pub const TAG_MISMATCH: u8 = 26;
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Exists(_) => exit::EXISTS,
            CliError::Locked(_) => exit::LOCKED,
            CliError::TagMismatch => exit::TAG_MISMATCH,
            CliError::Usage(_) => exit::USAGE,
            CliError::Core(e) => match e {
                Error::Io { .. } => exit::IO,
                Error::MalformedDocument(_) => exit::MALFORMED,
                Error::InvariantViolation(_) => exit::INVARIANT,
                Error::Parameter(_) => exit::PARAMETER,
                Error::NotInvertible | Error::DegeneratePoints | Error::Overflow { .. } => {
                    exit::ARITHMETIC
                }
                Error::DuplicateParticipant(_) => exit::DUPLICATE_PARTICIPANT,
                Error::UnknownParticipant(_) => exit::UNKNOWN_PARTICIPANT,
                Error::UnknownSecret(_) => exit::UNKNOWN_SECRET,
                Error::SecretTooLarge => exit::SECRET_TOO_LARGE,
                Error::NotAntichain { .. } => exit::NOT_ANTICHAIN,
                Error::EmptyStructure | Error::EmptySet(_) => exit::EMPTY_STRUCTURE,
                Error::IndexOutOfRange { .. } => exit::INDEX_OUT_OF_RANGE,
                Error::LastEntry => exit::LAST_ENTRY,
                Error::StructureBecameEmpty(_) => exit::STRUCTURE_BECAME_EMPTY,
                Error::NotAMember { .. } => exit::NOT_A_MEMBER,
                Error::MissingContribution(_) => exit::MISSING_CONTRIBUTION,
                Error::ExtraContribution(_) => exit::EXTRA_CONTRIBUTION,
                Error::BadContribution(_) => exit::BAD_CONTRIBUTION,
                Error::UnmaskOutOfField => exit::UNMASK_OUT_OF_FIELD,
            },
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "msss", version, about = "Multi-secret sharing over generalized access structures")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub hooks: HookArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate public parameters and the dealer's private state.
    Setup(SetupArgs),
    /// Create a participant key and publish its pseudo-share.
    Enroll(EnrollArgs),
    /// Share a secret under an access structure.
    Share(ShareArgs),
    /// Compute a participant's reconstruction value.
    Contribute(ContributeArgs),
    /// Check contributions, recover a secret and check its tag.
    Reconstruct(ReconstructArgs),
    /// Check contributions and, optionally, a claimed secret.
    Verify(VerifyArgs),
    /// Change secrets, qualified sets or participants.
    #[command(subcommand)]
    Update(UpdateCommand),
    /// Run an in-memory deployment and print a JSON report.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct BoardArgs {
    /// Public bulletin board document.
    #[arg(long)]
    pub board: PathBuf,
}

#[derive(Debug, Args)]
pub struct DealerArgs {
    #[command(flatten)]
    pub board: BoardArgs,
    /// Dealer private state document.
    #[arg(long)]
    pub dealer: PathBuf,
    /// Seed a deterministic generator instead of the system source.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[command(flatten)]
    pub dealer: DealerArgs,
    /// Bits per prime factor of n.
    #[arg(long, default_value_t = 512)]
    pub bits: u64,
    /// Replace existing board and dealer files.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct EnrollArgs {
    #[command(flatten)]
    pub board: BoardArgs,
    #[arg(long)]
    pub id: String,
    /// Where to write the participant's private key file.
    #[arg(long)]
    pub key_out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SecretArg {
    /// Secret as a decimal number or 0x-prefixed hex (or text with --text).
    #[arg(long)]
    pub secret: String,
    /// Encode --secret as UTF-8 bytes, big-endian.
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct ShareArgs {
    #[command(flatten)]
    pub dealer: DealerArgs,
    #[command(flatten)]
    pub secret: SecretArg,
    /// Minimal qualified sets, e.g. "A,B|B,C".
    #[arg(long)]
    pub sets: String,
}

#[derive(Debug, Args)]
pub struct SessionArgs {
    #[command(flatten)]
    pub board: BoardArgs,
    #[arg(long)]
    pub secret_id: u32,
    /// Qualified set number, starting at 1.
    #[arg(long)]
    pub set: usize,
}

#[derive(Debug, Args)]
pub struct ContributeArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long)]
    pub key: PathBuf,
    /// Write the contribution document here.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    /// Contribution documents, one per member of the set.
    #[arg(long = "contribution", required = true, num_args = 1..)]
    pub contributions: Vec<PathBuf>,
    /// Skip the per-contribution check and rely on the tag alone.
    #[arg(long)]
    pub skip_checks: bool,
    /// Also print the secret decoded as UTF-8 text.
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub session: SessionArgs,
    #[arg(long = "contribution", num_args = 1..)]
    pub contributions: Vec<PathBuf>,
    /// A recovered secret to check against the published tag.
    #[arg(long)]
    pub secret: Option<String>,
    #[arg(long)]
    pub text: bool,
}

#[derive(Debug, Subcommand)]
pub enum UpdateCommand {
    /// Re-share a secret with fresh randomness, optionally changing it.
    Renew {
        #[command(flatten)]
        dealer: DealerArgs,
        #[arg(long)]
        secret_id: u32,
        /// New secret value; the current one is kept when absent.
        #[arg(long)]
        secret: Option<String>,
        #[arg(long)]
        text: bool,
    },
    /// Add a minimal qualified set to a secret.
    AddSet {
        #[command(flatten)]
        dealer: DealerArgs,
        #[arg(long)]
        secret_id: u32,
        /// Members, e.g. "A,C".
        #[arg(long)]
        set: String,
    },
    /// Withdraw a qualified set (numbered from 1).
    RemoveSet {
        #[command(flatten)]
        dealer: DealerArgs,
        #[arg(long)]
        secret_id: u32,
        #[arg(long)]
        set: usize,
    },
    /// Remove a participant and renew every secret that mentioned it.
    RemoveParticipant {
        #[command(flatten)]
        dealer: DealerArgs,
        #[arg(long)]
        id: String,
        /// Withdraw secrets left without a qualified set instead of refusing.
        #[arg(long)]
        suspend_empty: bool,
    },
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 5)]
    pub participants: usize,
    #[arg(long, default_value_t = 3)]
    pub secrets: usize,
    #[arg(long, default_value_t = 4)]
    pub max_sets: usize,
    /// Largest minimal set; 0 allows the whole roster.
    #[arg(long, default_value_t = 0)]
    pub max_set_size: usize,
    /// Tampered contributions per qualified session.
    #[arg(long, default_value_t = 0)]
    pub cheaters: usize,
    #[arg(long, default_value_t = 3)]
    pub coalitions: usize,
    #[arg(long, default_value_t = 16)]
    pub bits: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Include per-session timings (makes the report non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

/// Fixed values that replace random draws, for reproducible fixtures.
#[derive(Clone, Debug, Default)]
pub struct Fixture {
    pub primes: Option<(BigUint, BigUint)>,
    pub generator: Option<BigUint>,
    pub share: Option<BigUint>,
    pub draws: Option<ShareDraws>,
    pub d: Option<BigUint>,
}

#[cfg(feature = "test-hooks")]
#[derive(Debug, Default, Args)]
pub struct HookArgs {
    /// Use these primes for setup, e.g. "11,13".
    #[arg(long, global = true)]
    pub test_primes: Option<String>,
    #[arg(long, global = true)]
    pub test_generator: Option<String>,
    /// Participant share for enroll.
    #[arg(long, global = true)]
    pub test_share: Option<String>,
    /// "s0,a,d1,d2,..." for share or renew.
    #[arg(long, global = true)]
    pub test_draws: Option<String>,
    /// Abscissa for add-set.
    #[arg(long, global = true)]
    pub test_d: Option<String>,
}

#[cfg(not(feature = "test-hooks"))]
#[derive(Debug, Default, Args)]
pub struct HookArgs {}

impl HookArgs {
    #[cfg(feature = "test-hooks")]
    pub fn fixture(&self) -> CliResult<Fixture> {
        let list = |text: &str| text.split(',').map(|v| parse_uint(v.trim())).collect::<CliResult<Vec<_>>>();
        let primes = match &self.test_primes {
            Some(text) => match list(text)?.as_slice() {
                [p, q] => Some((p.clone(), q.clone())),
                _ => return Err(CliError::Usage("--test-primes takes two values".into())),
            },
            None => None,
        };
        let draws = match &self.test_draws {
            Some(text) => {
                let values = list(text)?;
                if values.len() < 3 {
                    return Err(CliError::Usage("--test-draws takes s0,a,d1[,d2...]".into()));
                }
                Some(ShareDraws {
                    s0: values[0].clone(),
                    a1: values[1].clone(),
                    d: values[2..].to_vec(),
                })
            }
            None => None,
        };
        Ok(Fixture {
            primes,
            generator: self.test_generator.as_deref().map(parse_uint).transpose()?,
            share: self.test_share.as_deref().map(parse_uint).transpose()?,
            draws,
            d: self.test_d.as_deref().map(parse_uint).transpose()?,
        })
    }

    #[cfg(not(feature = "test-hooks"))]
    pub fn fixture(&self) -> CliResult<Fixture> {
        Ok(Fixture::default())
    }
}

/// Parses a decimal or `0x`-prefixed hexadecimal integer.
pub fn parse_uint(text: &str) -> CliResult<BigUint> {
    let parsed = match text.strip_prefix("0x") {
        Some(hex) => BigUint::from_str_radix(hex, 16),
        None => BigUint::from_str_radix(text, 10),
    };
    parsed.map_err(|_| CliError::Usage(format!("{text:?} is not a non-negative integer")))
}

/// Secrets given as text are encoded big-endian into one field element.
pub fn parse_secret(text: &str, as_text: bool) -> CliResult<BigUint> {
    if as_text {
        Ok(BigUint::from_bytes_be(text.as_bytes()))
    } else {
        parse_uint(text)
    }
}

fn rng_for(seed: Option<u64>) -> Box<dyn RngCore> {
    match seed {
        Some(seed) => Box::new(ChaCha20Rng::seed_from_u64(seed)),
        None => Box::new(StdRng::from_entropy()),
    }
}

fn pid(text: &str) -> CliResult<ParticipantId> {
    Ok(ParticipantId::new(text)?)
}

fn set_index(set: usize) -> CliResult<usize> {
    set.checked_sub(1)
        .ok_or_else(|| CliError::Usage("qualified sets are numbered from 1".into()))
}

fn load_dealer(args: &DealerArgs) -> CliResult<(Board, DealerState)> {
    let board = Board::load(&args.board.board)?;
    let dealer: DealerState = read_json(&args.dealer)?;
    dealer.check_against(board.params())?;
    Ok((board, dealer))
}

/// Persists dealer state first: a crash between the two writes leaves a
/// dealer that knows more than the board, which a re-run can publish.
fn store_dealer(args: &DealerArgs, board: &Board, dealer: &DealerState) -> CliResult {
    write_json(&args.dealer, dealer)?;
    board.save(&args.board.board)?;
    Ok(())
}

/// Runs one parsed command, writing its normal output to `out`.
pub fn execute(cli: &Cli, fixture: &Fixture, out: &mut dyn Write) -> CliResult {
    match &cli.command {
        Command::Setup(args) => cmd_setup(args, fixture, out),
        Command::Enroll(args) => cmd_enroll(args, fixture, out),
        Command::Share(args) => cmd_share(args, fixture, out),
        Command::Contribute(args) => cmd_contribute(args, out),
        Command::Reconstruct(args) => cmd_reconstruct(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Update(cmd) => cmd_update(cmd, fixture, out),
        Command::Simulate(args) => cmd_simulate(args, out),
    }
}

/// Parses `args`, executes, and maps the result to an exit code; errors go
/// to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = write!(err, "{e}");
            return 2;
        }
        Err(e) => {
            let _ = write!(out, "{e}");
            return 0;
        }
    };
    let outcome = cli.hooks.fixture().and_then(|f| execute(&cli, &f, out));
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn io_err(e: std::io::Error) -> CliError {
    Error::Io {
        path: PathBuf::from("<output>"),
        source: e,
    }
    .into()
}

fn cmd_setup(args: &SetupArgs, fixture: &Fixture, out: &mut dyn Write) -> CliResult {
    let paths = [&args.dealer.board.board, &args.dealer.dealer];
    if !args.force {
        if let Some(existing) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::Exists(existing.to_path_buf()));
        }
    }
    let _lock = BoardLock::acquire(&args.dealer.board.board)?;
    let mut rng = rng_for(args.dealer.seed);
    let (params, dealer) = match (&fixture.primes, &fixture.generator) {
        (Some((p, q)), Some(g)) => setup_with_generator(p.clone(), q.clone(), g.clone())?,
        (Some((p, q)), None) => setup_from_primes(p.clone(), q.clone(), &mut *rng)?,
        (None, _) => setup(args.bits, &mut *rng)?,
    };
    let board = Board::new(params.clone());
    store_dealer(&args.dealer, &board, &dealer)?;
    writeln!(out, "n: {}", params.n()).map_err(io_err)?;
    writeln!(out, "m: {}", params.m()).map_err(io_err)?;
    writeln!(out, "g: {}", params.g()).map_err(io_err)?;
    writeln!(out, "n-bits: {}", params.n().bits()).map_err(io_err)?;
    writeln!(out, "width: {}", params.width().bytes()).map_err(io_err)?;
    Ok(())
}

fn cmd_enroll(args: &EnrollArgs, fixture: &Fixture, out: &mut dyn Write) -> CliResult {
    let id = pid(&args.id)?;
    let _lock = BoardLock::acquire(&args.board.board)?;
    let mut board = Board::load(&args.board.board)?;
    if board.roster().contains(&id) {
        return Err(Error::DuplicateParticipant(id).into());
    }
    if args.key_out.exists() {
        return Err(CliError::Exists(args.key_out.clone()));
    }
    let key = match &fixture.share {
        Some(s) => ParticipantKey::from_share(board.params(), id.clone(), s.clone())?,
        None => ParticipantKey::generate(board.params(), id.clone(), &mut *rng_for(args.seed)),
    };
    board.enroll(id.clone(), key.pseudo_share().clone())?;
    create_json(&args.key_out, &key)?;
    board.save(&args.board.board)?;
    writeln!(out, "enrolled: {id}").map_err(io_err)?;
    writeln!(out, "ps: {}", msss::codec::hex_int::to_hex(key.pseudo_share())).map_err(io_err)?;
    Ok(())
}

fn cmd_share(args: &ShareArgs, fixture: &Fixture, out: &mut dyn Write) -> CliResult {
    let secret = parse_secret(&args.secret.secret, args.secret.text)?;
    let structure = AccessStructure::parse(&args.sets)?;
    let _lock = BoardLock::acquire(&args.dealer.board.board)?;
    let (mut board, mut dealer) = load_dealer(&args.dealer)?;
    let (params, roster) = (board.params().clone(), board.roster().clone());
    let package = match &fixture.draws {
        Some(draws) => dealer.share_secret_with(&params, &roster, secret, structure, draws.clone())?,
        None => {
            let mut rng = rng_for(args.dealer.seed);
            dealer.share_secret(&params, &roster, secret, structure, &mut *rng)?
        }
    };
    let id = package.secret_id;
    board.publish(package)?;
    store_dealer(&args.dealer, &board, &dealer)?;
    writeln!(out, "secret-id: {id}").map_err(io_err)?;
    Ok(())
}

fn cmd_contribute(args: &ContributeArgs, out: &mut dyn Write) -> CliResult {
    let board = Board::load(&args.session.board.board)?;
    let package = board.package(SecretId(args.session.secret_id))?;
    let key: ParticipantKey = read_json(&args.key)?;
    key.check_against(board.params())?;
    let contribution = key.contribute(board.params(), package, set_index(args.session.set)?)?;
    write_json(&args.out, &contribution)?;
    writeln!(out, "x: {}", msss::codec::hex_int::to_hex(&contribution.x)).map_err(io_err)?;
    Ok(())
}

fn read_contributions(paths: &[PathBuf]) -> CliResult<Vec<Contribution>> {
    paths.iter().map(|p| read_json::<Contribution>(p)).collect()
}

fn print_secret(out: &mut dyn Write, secret: &BigUint, as_text: bool) -> CliResult {
    writeln!(out, "secret: {secret}").map_err(io_err)?;
    if as_text {
        let bytes = secret.to_bytes_be();
        writeln!(out, "text: {}", String::from_utf8_lossy(&bytes)).map_err(io_err)?;
    }
    Ok(())
}

fn cmd_reconstruct(args: &ReconstructArgs, out: &mut dyn Write) -> CliResult {
    let board = Board::load(&args.session.board.board)?;
    let package = board.package(SecretId(args.session.secret_id))?;
    let j = set_index(args.session.set)?;
    let contributions = read_contributions(&args.contributions)?;
    let params = board.params();

    let recovered = if args.skip_checks {
        let members = &package.entry(j)?.gamma;
        if let Some(c) = contributions.iter().find(|c| !members.contains(&c.pid)) {
            return Err(Error::ExtraContribution(c.pid.clone()).into());
        }
        if let Some(missing) = members.iter().find(|m| !contributions.iter().any(|c| &c.pid == *m)) {
            return Err(Error::MissingContribution(missing.clone()).into());
        }
        unmask_and_recover(params, package, j, contributions.iter().map(|c| &c.x))
    } else {
        reconstruct(params, board.roster(), package, j, &contributions)
    };
    let secret = match recovered {
        Ok(secret) => secret,
        Err(Error::BadContribution(cheaters)) => {
            for c in &cheaters {
                writeln!(out, "cheater: {c}").map_err(io_err)?;
            }
            return Err(Error::BadContribution(cheaters).into());
        }
        Err(e) => return Err(e.into()),
    };
    print_secret(out, &secret, args.text)?;
    if verify_secret(package, j, &secret, params.width()) {
        writeln!(out, "tag: ok").map_err(io_err)?;
        Ok(())
    } else {
        writeln!(out, "tag: mismatch").map_err(io_err)?;
        Err(CliError::TagMismatch)
    }
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    let board = Board::load(&args.session.board.board)?;
    let package = board.package(SecretId(args.session.secret_id))?;
    let j = set_index(args.session.set)?;
    package.entry(j)?;
    let mut cheaters = Vec::new();
    for c in read_contributions(&args.contributions)? {
        let ps = board.roster().pseudo_share(&c.pid)?;
        if c.set_index == j && verify_contribution(board.params(), package, ps, &c) {
            writeln!(out, "ok: {}", c.pid).map_err(io_err)?;
        } else {
            writeln!(out, "cheater: {}", c.pid).map_err(io_err)?;
            cheaters.push(c.pid);
        }
    }
    let tag_ok = match &args.secret {
        Some(text) => {
            let secret = parse_secret(text, args.text)?;
            let ok = verify_secret(package, j, &secret, board.params().width());
            writeln!(out, "tag: {}", if ok { "ok" } else { "mismatch" }).map_err(io_err)?;
            ok
        }
        None => true,
    };
    if !cheaters.is_empty() {
        return Err(Error::BadContribution(cheaters).into());
    }
    if !tag_ok {
        return Err(CliError::TagMismatch);
    }
    Ok(())
}

fn cmd_update(cmd: &UpdateCommand, fixture: &Fixture, out: &mut dyn Write) -> CliResult {
    let dealer_args = match cmd {
        UpdateCommand::Renew { dealer, .. }
        | UpdateCommand::AddSet { dealer, .. }
        | UpdateCommand::RemoveSet { dealer, .. }
        | UpdateCommand::RemoveParticipant { dealer, .. } => dealer,
    };
    let _lock = BoardLock::acquire(&dealer_args.board.board)?;
    let (mut board, mut dealer) = load_dealer(dealer_args)?;
    let params = board.params().clone();
    let mut roster = board.roster().clone();
    let mut rng = rng_for(dealer_args.seed);

    match cmd {
        UpdateCommand::Renew {
            secret_id,
            secret,
            text,
            ..
        } => {
            let id = SecretId(*secret_id);
            let value = match secret {
                Some(s) => parse_secret(s, *text)?,
                None => dealer.record(id)?.k0.clone(),
            };
            let package = match &fixture.draws {
                Some(draws) => dealer.renew_secret_with(&params, &roster, id, value, draws.clone())?,
                None => dealer.renew_secret(&params, &roster, id, value, &mut *rng)?,
            };
            board.publish(package)?;
            writeln!(out, "renewed: {id}").map_err(io_err)?;
        }
        UpdateCommand::AddSet { secret_id, set, .. } => {
            let id = SecretId(*secret_id);
            let gamma = set
                .split(',')
                .map(|s| pid(s.trim()))
                .collect::<CliResult<_>>()?;
            let package = match &fixture.d {
                Some(d) => dealer.add_qualified_set_with(&params, &roster, id, gamma, d.clone())?,
                None => dealer.add_qualified_set(&params, &roster, id, gamma, &mut *rng)?,
            };
            let count = package.entries.len();
            board.publish(package)?;
            writeln!(out, "secret-id: {id}\nset: {count}").map_err(io_err)?;
        }
        UpdateCommand::RemoveSet { secret_id, set, .. } => {
            let id = SecretId(*secret_id);
            let package = dealer.remove_qualified_set(id, set_index(*set)?)?;
            board.publish(package)?;
            writeln!(out, "secret-id: {id}\nremoved-set: {set}").map_err(io_err)?;
        }
        UpdateCommand::RemoveParticipant {
            id, suspend_empty, ..
        } => {
            let id = pid(id)?;
            let policy = if *suspend_empty {
                EmptyStructurePolicy::Suspend
            } else {
                EmptyStructurePolicy::Reject
            };
            let report = dealer.remove_participant(&params, &mut roster, &id, policy, &mut *rng)?;
            board.apply_removal(&id, &report)?;
            let renewed: Vec<String> = report.renewed.iter().map(|p| p.secret_id.to_string()).collect();
            let suspended: Vec<String> = report.suspended.iter().map(ToString::to_string).collect();
            writeln!(out, "removed: {id}").map_err(io_err)?;
            writeln!(out, "renewed: {}", renewed.join(",")).map_err(io_err)?;
            writeln!(out, "suspended: {}", suspended.join(",")).map_err(io_err)?;
        }
    }
    store_dealer(dealer_args, &board, &dealer)
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CliResult {
    let config = sim::SimConfig {
        participants: args.participants,
        secrets: args.secrets,
        max_sets: args.max_sets,
        max_set_size: args.max_set_size,
        cheaters_per_session: args.cheaters,
        coalitions_per_secret: args.coalitions,
        prime_bits: args.bits,
        seed: args.seed,
        timings: args.timings,
    };
    let report = sim::run_simulation(&config).map_err(CliError::Usage)?;
    writeln!(out, "{}", report.to_json()).map_err(io_err)?;
    Ok(())
}

/// Convenience for tests and scripts: the package fingerprint of every
/// secret on a board, keyed by id.
pub fn board_fingerprints(path: &Path) -> CliResult<Vec<(SecretId, String)>> {
    let board = Board::load(path)?;
    Ok(board.packages().map(|p| (p.secret_id, p.fingerprint())).collect())
}
