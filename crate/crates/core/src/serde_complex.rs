//! Serializes a complex number as `{"re": .., "im": ..}`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::sphere::Complex;

#[derive(Serialize, Deserialize)]
struct Repr {
    re: f64,
    im: f64,
}

pub fn serialize<S: Serializer>(z: &Complex, s: S) -> Result<S::Ok, S::Error> {
    Repr { re: z.re, im: z.im }.serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex, D::Error> {
    let r = Repr::deserialize(d)?;
    Ok(Complex::new(r.re, r.im))
}

pub mod option {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Option<Complex>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| Repr { re: z.re, im: z.im }).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex>, D::Error> {
        Ok(Option::<Repr>::deserialize(d)?.map(|r| Complex::new(r.re, r.im)))
    }
}
