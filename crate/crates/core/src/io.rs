//! Serialization helpers.
//!
//! Big integers go into JSON as bare decimal number literals of any length
//! (never floats, never scientific notation). They are read back from either a
//! number literal or a decimal string.

use num_bigint::BigUint;

pub(crate) fn parse_decimal(text: &str) -> Option<BigUint> {
    let t = text.trim().trim_matches('"');
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// `#[serde(with = "crate::io::big")]` for `BigUint` fields.
pub mod big {
    use num_bigint::BigUint;
    use serde::de::Error as _;
    use serde::ser::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        RawValue::from_string(v.to_str_radix(10))
            .map_err(S::Error::custom)?
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let raw = Box::<RawValue>::deserialize(d)?;
        super::parse_decimal(raw.get()).ok_or_else(|| {
            D::Error::custom(format!("expected a decimal integer, got {}", raw.get()))
        })
    }
}

/// `#[serde(with = "crate::io::big_vec")]` for `Vec<BigUint>` fields.
pub mod big_vec {
    use num_bigint::BigUint;
    use serde::de::Error as _;
    use serde::ser::{Error as _, SerializeSeq};
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(
                &RawValue::from_string(x.to_str_radix(10)).map_err(S::Error::custom)?,
            )?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        let raw = Vec::<Box<RawValue>>::deserialize(d)?;
        raw.iter()
            .map(|r| {
                super::parse_decimal(r.get()).ok_or_else(|| {
                    D::Error::custom(format!("expected a decimal integer, got {}", r.get()))
                })
            })
            .collect()
    }
}

/// `#[serde(with = "crate::io::big_opt")]` for `Option<BigUint>` fields.
pub mod big_opt {
    use num_bigint::BigUint;
    use serde::de::Error as _;
    use serde::ser::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => RawValue::from_string(x.to_str_radix(10))
                .map_err(S::Error::custom)?
                .serialize(s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigUint>, D::Error> {
        let raw = Option::<Box<RawValue>>::deserialize(d)?;
        match raw {
            None => Ok(None),
            Some(r) if r.get().trim() == "null" => Ok(None),
            Some(r) => super::parse_decimal(r.get()).map(Some).ok_or_else(|| {
                D::Error::custom(format!("expected a decimal integer, got {}", r.get()))
            }),
        }
    }
}

/// `#[serde(with = "crate::io::big_opt_vec")]` for `Vec<Option<BigUint>>` fields.
pub mod big_opt_vec {
    use num_bigint::BigUint;
    use serde::de::Error as _;
    use serde::ser::{Error as _, SerializeSeq};
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &[Option<BigUint>], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            let text = x
                .as_ref()
                .map_or_else(|| "null".to_string(), |x| x.to_str_radix(10));
            seq.serialize_element(&RawValue::from_string(text).map_err(S::Error::custom)?)?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<BigUint>>, D::Error> {
        let raw = Vec::<Box<RawValue>>::deserialize(d)?;
        raw.iter()
            .map(|r| match r.get().trim() {
                "null" => Ok(None),
                t => super::parse_decimal(t).map(Some).ok_or_else(|| {
                    D::Error::custom(format!("expected a decimal integer, got {t}"))
                }),
            })
            .collect()
    }
}

/// `#[serde(with = "crate::io::signed_vec")]` for `Vec<BigInt>` fields.
pub mod signed_vec {
    use num_bigint::BigInt;
    use serde::de::Error as _;
    use serde::ser::{Error as _, SerializeSeq};
    use serde::{Deserialize, Deserializer, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(
                &RawValue::from_string(x.to_str_radix(10)).map_err(S::Error::custom)?,
            )?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let raw = Vec::<Box<RawValue>>::deserialize(d)?;
        raw.iter()
            .map(|r| {
                let t = r.get().trim().trim_matches('"');
                let digits = t.strip_prefix('-').unwrap_or(t);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(D::Error::custom(format!(
                        "expected a decimal integer, got {t}"
                    )));
                }
                t.parse().map_err(D::Error::custom)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use num_bigint::BigUint;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Mixed {
        #[serde(with = "super::big_opt_vec")]
        a: Vec<Option<BigUint>>,
        #[serde(with = "super::signed_vec")]
        b: Vec<num_bigint::BigInt>,
    }

    #[test]
    fn optional_and_signed() {
        let m = Mixed {
            a: vec![Some(BigUint::from(5u32)), None],
            b: vec![(-7).into(), 55.into()],
        };
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"a":[5,null],"b":[-7,55]}"#);
        assert_eq!(serde_json::from_str::<Mixed>(&s).unwrap(), m);
    }

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Holder {
        #[serde(with = "super::big")]
        x: BigUint,
        #[serde(with = "super::big_vec")]
        xs: Vec<BigUint>,
    }

    #[test]
    fn wide_integers_stay_exact() {
        let x: BigUint = "36027949730354525123456789012345678901".parse().unwrap();
        let h = Holder {
            x: x.clone(),
            xs: vec![x.clone(), BigUint::from(7u32)],
        };
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(
            s,
            r#"{"x":36027949730354525123456789012345678901,"xs":[36027949730354525123456789012345678901,7]}"#
        );
        let back: Holder = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        let quoted: Holder = serde_json::from_str(r#"{"x":"12","xs":["3"]}"#).unwrap();
        assert_eq!(quoted.x, BigUint::from(12u32));
        assert!(serde_json::from_str::<Holder>(r#"{"x":1.5e3,"xs":[]}"#).is_err());
    }
}
