//! Serde helpers writing reals as decimal strings with 17 significant digits.
//!
//! Seventeen significant digits round-trip every finite `f64` exactly.

use serde::{Deserialize, Deserializer, Serializer};

/// Formats `v` with 17 significant digits in scientific notation.
pub fn format17(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v)
    } else if v.is_nan() {
        "NaN".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse(s: &str) -> Result<f64, std::num::ParseFloatError> {
    s.trim().parse::<f64>()
}

pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format17(*v))
}

/// Accepts either a decimal string or a bare JSON number on input.
#[derive(Deserialize)]
#[serde(untagged)]
enum Raw {
    Text(String),
    Number(f64),
}

impl Raw {
    fn value<E: serde::de::Error>(self) -> Result<f64, E> {
        match self {
            Raw::Text(s) => parse(&s).map_err(E::custom),
            Raw::Number(v) => Ok(v),
        }
    }
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Raw::deserialize(d)?.value()
}

pub mod vec {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&format17(*x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Raw>::deserialize(d)?.into_iter().map(Raw::value).collect()
    }
}

pub mod opt {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => super::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<Raw>::deserialize(d)?.map(Raw::value).transpose()
    }
}

pub mod opt_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => super::vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        let raw = Option::<Vec<Raw>>::deserialize(d)?;
        raw.map(|v| v.into_iter().map(Raw::value).collect()).transpose()
    }
}

pub mod pairs {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[(f64, f64)], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for (a, b) in v {
            seq.serialize_element(&[format17(*a), format17(*b)])?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(f64, f64)>, D::Error> {
        Vec::<(Raw, Raw)>::deserialize(d)?
            .into_iter()
            .map(|(a, b)| Ok((a.value()?, b.value()?)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format17(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(format17(1.0), "1.0000000000000000e0");
    }

    proptest! {
        #[test]
        fn round_trips_every_finite_double(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            prop_assert_eq!(parse(&format17(v)).unwrap().to_bits(), v.to_bits());
        }
    }
}
