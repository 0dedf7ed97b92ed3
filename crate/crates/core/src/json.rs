//! Canonical JSON: sorted keys, rationals as lowest-terms `"p/q"` strings,
//! lattices and matrices as arrays of columns and rows.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complex::{PeriodicComplex, Simplex};
use crate::lattice::{Lattice, Polarization};
use crate::linalg::{Matrix, RationalVector};
use crate::rational::Rational;

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Rational::from_integer(i)),
            Raw::Text(t) => t.parse().map_err(D::Error::custom),
        }
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Vec::<Rational>::deserialize(d).map(RationalVector)
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.row_vecs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Rational>>::deserialize(d)?;
        Matrix::from_rows(rows).map_err(D::Error::custom)
    }
}

impl Serialize for Lattice {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.generators().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Lattice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let cols = Vec::<RationalVector>::deserialize(d)?;
        Lattice::from_columns(&cols).map_err(D::Error::custom)
    }
}

impl Serialize for Polarization {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.gram().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polarization {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Polarization::new(Matrix::deserialize(d)?).map_err(D::Error::custom)
    }
}

impl Serialize for Simplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.vertices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Simplex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Simplex::new(Vec::<RationalVector>::deserialize(d)?).map_err(D::Error::custom)
    }
}

#[derive(Serialize)]
struct ComplexView<'a> {
    dim: usize,
    level: u32,
    period: &'a Lattice,
    cell_count: usize,
    /// Representatives in period coordinates, canonical order.
    cells: &'a [Vec<RationalVector>],
}

impl Serialize for PeriodicComplex {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ComplexView {
            dim: self.dim(),
            level: self.level(),
            period: self.period(),
            cell_count: self.len(),
            cells: self.local_cells(),
        }
        .serialize(s)
    }
}

/// Pretty-printed JSON with recursively sorted keys and a trailing newline.
pub fn to_canonical_string<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // Without the `preserve_order` feature `serde_json::Map` is a BTreeMap,
    // so the round trip through `Value` sorts every object's keys.
    let v = serde_json::to_value(value)?;
    let mut out = serde_json::to_string_pretty(&v)?;
    out.push('\n');
    Ok(out)
}
