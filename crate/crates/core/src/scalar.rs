//! Complex scalars and their JSON form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Complex double used for every parameter and spectral value.
pub type C64 = Complex64;

/// `{ "re": …, "im": … }` on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// `|actual - expected| / max(1, |expected|)`: absolute below unit magnitude,
/// relative above it.
pub fn rel_dev(actual: C64, expected: C64) -> f64 {
    (actual - expected).norm() / expected.norm().max(1.0)
}

pub fn to_json_vec(v: &[C64]) -> Vec<JsonComplex> {
    v.iter().copied().map(JsonComplex::from).collect()
}

/// Serde adapter for `C64` fields.
pub mod serde_c64 {
    use super::{JsonComplex, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        JsonComplex::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        JsonComplex::deserialize(d).map(C64::from)
    }
}

/// Serde adapter for `Vec<C64>` fields.
pub mod serde_c64_vec {
    use super::{JsonComplex, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<JsonComplex> = v.iter().copied().map(JsonComplex::from).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let w = Vec::<JsonComplex>::deserialize(d)?;
        Ok(w.into_iter().map(C64::from).collect())
    }
}

/// Serde adapter for `Option<C64>` fields; `None` is `null`.
pub mod serde_opt_c64 {
    use super::{JsonComplex, C64};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<C64>, s: S) -> Result<S::Ok, S::Error> {
        v.map(JsonComplex::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<C64>, D::Error> {
        Ok(Option::<JsonComplex>::deserialize(d)?.map(C64::from))
    }
}
