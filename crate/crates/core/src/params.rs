//! Parsing of short `family key=value ...` descriptors used by the CLI and bindings,
//! e.g. `power p=2.5`, `family=powerabs alpha=0.5 center=0`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Descriptor {
    pub family: String,
    pub params: BTreeMap<String, f64>,
}

impl Descriptor {
    pub fn parse(text: &str) -> Result<Self> {
        Self::from_tokens(text.split_whitespace())
    }

    pub fn from_tokens<'a>(tokens: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut family = None;
        let mut params = BTreeMap::new();
        for tok in tokens {
            match tok.split_once('=') {
                Some(("family", v)) => family = Some(v.to_ascii_lowercase()),
                Some((k, v)) => {
                    let value: f64 = v.parse().map_err(|_| {
                        Error::InvalidParameter(format!("`{k}` expects a number, got `{v}`"))
                    })?;
                    if params.insert(k.to_ascii_lowercase(), value).is_some() {
                        return Err(Error::InvalidParameter(format!("`{k}` given twice")));
                    }
                }
                None if family.is_none() => family = Some(tok.to_ascii_lowercase()),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "unexpected token `{tok}` (expected key=value)"
                    )))
                }
            }
        }
        let family = family.ok_or_else(|| Error::InvalidParameter("missing family name".into()))?;
        Ok(Descriptor { family, params })
    }

    pub fn get(&self, key: &str) -> Result<f64> {
        self.params.get(key).copied().ok_or_else(|| {
            Error::InvalidParameter(format!("family `{}` needs parameter `{key}`", self.family))
        })
    }

    pub fn get_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    /// Rejects parameters outside `allowed`.
    pub fn expect_only(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidParameter(format!(
                "family `{}` does not take `{k}`",
                self.family
            ))),
            None => Ok(()),
        }
    }
}

/// Serde adapter writing non-finite floats as the strings `nan`, `inf` and `-inf`,
/// so reports survive a JSON round trip.
pub mod float_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "nan" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not a number: `{other}`"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_spellings() {
        let a = Descriptor::parse("power p=2.5").unwrap();
        let b = Descriptor::parse("family=power p=2.5").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.get("p").unwrap(), 2.5);
    }

    #[test]
    fn rejects_garbage() {
        assert!(Descriptor::parse("").is_err());
        assert!(Descriptor::parse("power p=abc").is_err());
        assert!(Descriptor::parse("power p=1 p=2").is_err());
        assert!(Descriptor::parse("power extra").is_err());
        let d = Descriptor::parse("power p=2 q=3").unwrap();
        assert!(d.expect_only(&["p"]).is_err());
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    struct Holder(#[serde(with = "float_text")] f64);

    #[test]
    fn non_finite_floats_round_trip() {
        for v in [1.5, f64::INFINITY, f64::NEG_INFINITY] {
            let text = serde_json::to_string(&Holder(v)).unwrap();
            assert_eq!(serde_json::from_str::<Holder>(&text).unwrap().0, v);
        }
        let nan = serde_json::to_string(&Holder(f64::NAN)).unwrap();
        assert_eq!(nan, "\"nan\"");
        assert!(serde_json::from_str::<Holder>(&nan).unwrap().0.is_nan());
        assert!(serde_json::from_str::<Holder>("\"x\"").is_err());
    }
}
