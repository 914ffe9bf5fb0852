//! Fixed-width byte encoding, XOR masking and the verification tag.
//!
//! All layouts are big-endian and zero-padded to the deployment's mask
//! width, which every party reads from the public parameters.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Domain separator prefixed to every tag preimage.
pub const TAG_DOMAIN: &[u8] = b"MSSS-v1";

/// Byte width shared by every masked value: `ceil(bitlen(m) / 8)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct MaskWidth(usize);

impl MaskWidth {
    pub fn new(bytes: usize) -> Result<Self> {
        if bytes == 0 {
            return Err(Error::Parameter("mask width must be at least one byte".into()));
        }
        Ok(MaskWidth(bytes))
    }

    pub fn for_modulus(m: &BigUint) -> Self {
        MaskWidth((m.bits() as usize).div_ceil(8).max(1))
    }

    pub fn bytes(self) -> usize {
        self.0
    }
}

impl TryFrom<usize> for MaskWidth {
    type Error = Error;

    fn try_from(bytes: usize) -> Result<Self> {
        MaskWidth::new(bytes)
    }
}

impl From<MaskWidth> for usize {
    fn from(width: MaskWidth) -> usize {
        width.0
    }
}

pub fn encode_fixed(value: &BigUint, width: MaskWidth) -> Result<Vec<u8>> {
    let raw = value.to_bytes_be();
    // to_bytes_be gives [0] for zero
    let raw: &[u8] = if raw == [0] { &[] } else { &raw };
    if raw.len() > width.0 {
        return Err(Error::Overflow {
            needed: raw.len(),
            width: width.0,
        });
    }
    let mut out = vec![0u8; width.0 - raw.len()];
    out.extend_from_slice(raw);
    Ok(out)
}

pub fn decode_fixed(bytes: &[u8]) -> BigUint {
    BigUint::from_bytes_be(bytes)
}

/// XORs the fixed-width encodings of `value` and every mask.
pub fn xor_combine<'a, I>(value: &BigUint, masks: I, width: MaskWidth) -> Result<BigUint>
where
    I: IntoIterator<Item = &'a BigUint>,
{
    let mut acc = encode_fixed(value, width)?;
    for mask in masks {
        let mask = encode_fixed(mask, width)?;
        acc.iter_mut().zip(&mask).for_each(|(a, b)| *a ^= b);
    }
    Ok(decode_fixed(&acc))
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Tag([u8; 32]);

impl Tag {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tag({})", self.to_hex())
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl TryFrom<String> for Tag {
    type Error = Error;

    fn try_from(text: String) -> Result<Self> {
        let canonical = text.len() == 64 && text.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !canonical {
            return Err(Error::MalformedDocument(format!("tag {text:?} is not 64 lowercase hex digits")));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(&text, &mut out).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        Ok(Tag(out))
    }
}

impl From<Tag> for String {
    fn from(tag: Tag) -> String {
        tag.to_hex()
    }
}

/// SHA-256 over `"MSSS-v1" || enc(secret) || enc(d)`.
pub fn tag(secret: &BigUint, d: &BigUint, width: MaskWidth) -> Result<Tag> {
    let mut hasher = Sha256::new();
    hasher.update(TAG_DOMAIN);
    hasher.update(encode_fixed(secret, width)?);
    hasher.update(encode_fixed(d, width)?);
    Ok(Tag(hasher.finalize().into()))
}

/// Serde adapter writing integers as lowercase hex without leading zeros.
pub mod hex_int {
    use num_bigint::BigUint;
    use num_traits::Num;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn to_hex(value: &BigUint) -> String {
        value.to_str_radix(16)
    }

    pub fn from_hex(text: &str) -> Result<BigUint, String> {
        let digits_ok = !text.is_empty() && text.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if !digits_ok {
            return Err(format!("{text:?} is not lowercase hex"));
        }
        if text.len() > 1 && text.starts_with('0') {
            return Err(format!("{text:?} has leading zeros"));
        }
        BigUint::from_str_radix(text, 16).map_err(|e| e.to_string())
    }

    pub fn serialize<S: Serializer>(value: &BigUint, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&to_hex(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigUint, D::Error> {
        let text = String::deserialize(deserializer)?;
        from_hex(&text).map_err(de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(values: &[BigUint], serializer: S) -> Result<S::Ok, S::Error> {
            let mut seq = serializer.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&to_hex(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<Vec<BigUint>, D::Error> {
            Vec::<String>::deserialize(deserializer)?
                .iter()
                .map(|t| from_hex(t).map_err(de::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn w(bytes: usize) -> MaskWidth {
        MaskWidth::new(bytes).unwrap()
    }

    #[test]
    fn width_from_modulus() {
        assert_eq!(MaskWidth::for_modulus(&big(149)), w(1));
        assert_eq!(MaskWidth::for_modulus(&big(255)), w(1));
        assert_eq!(MaskWidth::for_modulus(&big(256)), w(2));
        assert!(MaskWidth::new(0).is_err());
    }

    #[test]
    fn encode_examples() {
        assert_eq!(encode_fixed(&big(135), w(1)).unwrap(), vec![0x87]);
        assert_eq!(encode_fixed(&big(135), w(2)).unwrap(), vec![0x00, 0x87]);
        assert_eq!(encode_fixed(&big(0), w(3)).unwrap(), vec![0, 0, 0]);
        assert!(matches!(
            encode_fixed(&big(300), w(1)),
            Err(Error::Overflow { needed: 2, width: 1 })
        ));
    }

    #[test]
    fn xor_examples() {
        assert_eq!(0x87 ^ 0x6f ^ 0x50, 0xb8);
        assert_eq!(xor_combine(&big(135), &[big(111), big(80)], w(1)).unwrap(), big(184));
        assert_eq!(xor_combine(&big(184), &[big(111), big(80)], w(1)).unwrap(), big(135));
        assert_eq!(xor_combine(&big(77), &[], w(4)).unwrap(), big(77));
        assert!(xor_combine(&big(1), &[big(256)], w(1)).is_err());
    }

    // Digests computed with Python's hashlib over the literal preimages.
    #[test]
    fn tag_known_answers() {
        assert_eq!(
            tag(&big(0), &big(0), w(1)).unwrap().to_hex(),
            "be4157b7a6d64582180e62cabc67c41a107212986ca53c54edc46262a0285b1d"
        );
        assert_eq!(
            tag(&big(100), &big(7), w(1)).unwrap().to_hex(),
            "926615efb9514c8aefd6ded9d2423df2c10928a17c695cef2e37c8bb499be00d"
        );
        assert_eq!(
            tag(&big(100), &big(8), w(1)).unwrap().to_hex(),
            "dc024ab793d41b3d95ba06b23da486c2df74105062b24f184a5ce69883d01e77"
        );
        assert_eq!(tag(&big(100), &big(7), w(1)).unwrap(), tag(&big(100), &big(7), w(1)).unwrap());
        assert!(tag(&big(256), &big(7), w(1)).is_err());
    }

    #[test]
    fn tag_text_form_is_strict() {
        let t = tag(&big(1), &big(2), w(1)).unwrap();
        assert_eq!(Tag::try_from(t.to_hex()).unwrap(), t);
        assert!(Tag::try_from(t.to_hex().to_uppercase()).is_err());
        assert!(Tag::try_from("abcd".to_string()).is_err());
    }

    #[test]
    fn hex_int_is_canonical() {
        assert_eq!(hex_int::to_hex(&big(45)), "2d");
        assert_eq!(hex_int::to_hex(&big(0)), "0");
        assert_eq!(hex_int::from_hex("2d").unwrap(), big(45));
        assert_eq!(hex_int::from_hex("0").unwrap(), big(0));
        assert!(hex_int::from_hex("02d").is_err());
        assert!(hex_int::from_hex("2D").is_err());
        assert!(hex_int::from_hex("").is_err());
        assert!(hex_int::from_hex("-1").is_err());
    }

    proptest! {
        #[test]
        fn xor_is_an_involution_and_order_free(
            value in 0u64..1 << 40,
            mut masks in prop::collection::vec(0u64..1 << 40, 0..6),
        ) {
            let width = w(5);
            let value = big(value);
            let big_masks: Vec<BigUint> = masks.iter().copied().map(big).collect();
            let once = xor_combine(&value, &big_masks, width).unwrap();
            prop_assert_eq!(xor_combine(&once, &big_masks, width).unwrap(), value.clone());
            masks.reverse();
            let reversed: Vec<BigUint> = masks.into_iter().map(big).collect();
            prop_assert_eq!(xor_combine(&value, &reversed, width).unwrap(), once);
        }

        #[test]
        fn encoding_is_injective(a in 0u64..1 << 24, b in 0u64..1 << 24) {
            let (ea, eb) = (encode_fixed(&big(a), w(3)).unwrap(), encode_fixed(&big(b), w(3)).unwrap());
            prop_assert_eq!(ea.len(), 3);
            prop_assert_eq!(ea == eb, a == b);
            prop_assert_eq!(decode_fixed(&ea), big(a));
        }

        #[test]
        fn single_bit_flip_changes_tag(k in 0u64..1 << 16, d in 0u64..1 << 16, bit in 0u64..32) {
            let width = w(2);
            let (mut k2, mut d2) = (k, d);
            if bit < 16 { k2 ^= 1 << bit } else { d2 ^= 1 << (bit - 16) }
            prop_assert_ne!(tag(&big(k), &big(d), width).unwrap(), tag(&big(k2), &big(d2), width).unwrap());
        }
    }
}
