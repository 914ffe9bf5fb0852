//! Degree-1 polynomials `f(x) = k0 + a1·x` over the prime field Z_m.

use num_bigint::BigUint;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numtheory::mod_inv;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinePoly {
    k0: BigUint,
    a1: BigUint,
    m: BigUint,
}

impl LinePoly {
    /// A sharing polynomial. The slope must be nonzero: with `a1 = 0` the
    /// public point `(1, f(1))` would reveal the secret.
    pub fn new(k0: BigUint, a1: BigUint, m: BigUint) -> Result<Self> {
        if k0 >= m {
            return Err(Error::SecretTooLarge);
        }
        if a1.is_zero() || a1 >= m {
            return Err(Error::Parameter("slope must lie in [1, m-1]".into()));
        }
        Ok(LinePoly { k0, a1, m })
    }

    pub fn eval(&self, x: &BigUint) -> Result<BigUint> {
        if *x >= self.m {
            return Err(Error::Parameter("abscissa must be below m".into()));
        }
        Ok((&self.k0 + &self.a1 * x) % &self.m)
    }

    /// The constant term, i.e. the shared secret `f(0)`.
    pub fn secret(&self) -> &BigUint {
        &self.k0
    }

    pub fn slope(&self) -> &BigUint {
        &self.a1
    }

    pub fn modulus(&self) -> &BigUint {
        &self.m
    }
}

/// The unique line through `(x1, y1)` and `(x2, y2)` over Z_m.
///
/// The result can be constant when `y1 == y2`; that never happens for
/// points taken from a sharing polynomial.
pub fn interpolate_line(
    (x1, y1): (&BigUint, &BigUint),
    (x2, y2): (&BigUint, &BigUint),
    m: &BigUint,
) -> Result<LinePoly> {
    if [x1, y1, x2, y2].iter().any(|v| *v >= m) {
        return Err(Error::Parameter("coordinates must be below m".into()));
    }
    if x1 == x2 {
        return Err(Error::DegeneratePoints);
    }
    let dx = (x2 + m - x1) % m;
    let dy = (y2 + m - y1) % m;
    let a1 = dy * mod_inv(&dx, m)? % m;
    let k0 = (y1 + m - (&a1 * x1) % m) % m;
    Ok(LinePoly {
        k0,
        a1,
        m: m.clone(),
    })
}

pub fn secret_of(poly: &LinePoly) -> &BigUint {
    poly.secret()
}
