//! JSON encoding of matrices, used repo-wide:
//! `{"rows":R,"cols":C,"data":[[re,im],...]}` in row-major order.

use num_complex::Complex;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CMatrix;

#[derive(Serialize, Deserialize)]
struct Wire {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Wire {
            rows: self.rows(),
            cols: self.cols(),
            data: self.data().iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let w = Wire::deserialize(deserializer)?;
        let data = w.data.iter().map(|&[re, im]| Complex::new(re, im)).collect();
        CMatrix::new(w.rows, w.cols, data).map_err(D::Error::custom)
    }
}
