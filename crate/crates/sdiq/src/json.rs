//! JSON interchange formats for states, boxes, channels and measurements.
//!
//! States travel as `{dimA, dimB, re, im}` with the matrix split into real
//! and imaginary parts, boxes as `{nx, ny, na, nb, p}` with probabilities
//! nested `[x][y][a][b]`, channels as a list of Kraus matrices in the state
//! matrix format, and measurement families as per-setting effect lists.
//! Deserialisation always round-trips through the validating constructors,
//! so a file that parses is also a physically valid object.

use serde::{Deserialize, Serialize};

use crate::boxes::{Behavior, MeasurementFamily};
use crate::channels::KrausChannel;
use crate::error::Error;
use crate::qmath::{c, eig_hermitian, CMatrix, DensityMatrix, PureState};
use crate::Result;

/// Complex matrix as parallel real/imaginary row-major grids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let grid = |f: fn(&num_complex::Complex64) -> f64| {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let rows = self.re.len();
        if rows == 0 || self.im.len() != rows {
            return Err(Error::Schema(
                "re and im must be non-empty grids of equal shape".into(),
            ));
        }
        let cols = self.re[0].len();
        for (r, i) in self.re.iter().zip(&self.im) {
            if r.len() != cols || i.len() != cols {
                return Err(Error::Schema("ragged matrix rows".into()));
            }
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            c(self.re[i][j], self.im[i][j])
        }))
    }
}

/// Bipartite state schema `{dimA, dimB, re, im}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(rename = "dimA")]
    pub dim_a: usize,
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(flatten)]
    pub matrix: MatrixJson,
}

pub fn state_to_json(rho: &DensityMatrix) -> StateJson {
    StateJson {
        dim_a: rho.dim_a(),
        dim_b: rho.dim_b(),
        matrix: MatrixJson::from_matrix(rho.matrix()),
    }
}

pub fn state_from_json(s: &StateJson) -> Result<DensityMatrix> {
    let m = s.matrix.to_matrix()?;
    if m.nrows() != s.dim_a * s.dim_b || m.ncols() != s.dim_a * s.dim_b {
        return Err(Error::Schema(format!(
            "matrix is {}×{} but dimA·dimB = {}",
            m.nrows(),
            m.ncols(),
            s.dim_a * s.dim_b
        )));
    }
    DensityMatrix::new(s.dim_a, s.dim_b, m)
}

/// Reads a state file as a pure state, extracting the top eigenvector and
/// rejecting mixed inputs.
pub fn pure_from_json(s: &StateJson) -> Result<PureState> {
    let rho = state_from_json(s)?;
    let (evals, vecs) = eig_hermitian(rho.matrix())?;
    let (k, top) = evals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("spectrum is non-empty");
    if (top - 1.0).abs() > 1e-9 {
        return Err(Error::Schema(format!(
            "state is not pure: largest eigenvalue {top}"
        )));
    }
    let amps: Vec<num_complex::Complex64> = vecs.column(k).iter().copied().collect();
    PureState::from_amplitudes(&amps)
}

/// Behavior schema `{nx, ny, na, nb, p}` with `p` nested `[x][y][a][b]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxJson {
    pub nx: usize,
    pub ny: usize,
    pub na: usize,
    pub nb: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
}

pub fn box_to_json(bx: &Behavior) -> BoxJson {
    let (nx, ny) = bx.n_settings();
    let (na, nb) = bx.n_outcomes();
    let p = (0..nx)
        .map(|x| {
            (0..ny)
                .map(|y| {
                    (0..na)
                        .map(|a| (0..nb).map(|b| bx.prob(a, b, x, y)).collect())
                        .collect()
                })
                .collect()
        })
        .collect();
    BoxJson { nx, ny, na, nb, p }
}

pub fn box_from_json(b: &BoxJson) -> Result<Behavior> {
    let shape_ok = b.p.len() == b.nx
        && b.p.iter().all(|py| {
            py.len() == b.ny
                && py.iter().all(|pa| {
                    pa.len() == b.na && pa.iter().all(|pb| pb.len() == b.nb)
                })
        });
    if !shape_ok {
        return Err(Error::Schema(
            "p must be nested [x][y][a][b] matching the declared shape".into(),
        ));
    }
    Behavior::from_fn(b.nx, b.ny, b.na, b.nb, |a, bb, x, y| b.p[x][y][a][bb])
}

/// Channel schema: a list of Kraus matrices.
pub fn channel_to_json(ch: &KrausChannel) -> Vec<MatrixJson> {
    ch.kraus_ops().iter().map(MatrixJson::from_matrix).collect()
}

pub fn channel_from_json(ops: &[MatrixJson]) -> Result<KrausChannel> {
    let kraus: Result<Vec<CMatrix>> = ops.iter().map(|m| m.to_matrix()).collect();
    KrausChannel::new(kraus?)
}

/// Measurement schema: effects nested `[setting][outcome]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MeasurementJson {
    pub dim: usize,
    pub effects: Vec<Vec<MatrixJson>>,
}

pub fn measurement_to_json(fam: &MeasurementFamily) -> MeasurementJson {
    let effects = (0..fam.n_settings())
        .map(|x| {
            (0..fam.n_outcomes())
                .map(|a| MatrixJson::from_matrix(fam.effect(x, a)))
                .collect()
        })
        .collect();
    MeasurementJson {
        dim: fam.dim(),
        effects,
    }
}

pub fn measurement_from_json(m: &MeasurementJson) -> Result<MeasurementFamily> {
    let settings: Result<Vec<Vec<CMatrix>>> = m
        .effects
        .iter()
        .map(|outcomes| outcomes.iter().map(|e| e.to_matrix()).collect())
        .collect();
    let fam = MeasurementFamily::from_effects(settings?)?;
    if fam.dim() != m.dim {
        return Err(Error::Schema(format!(
            "declared dim {} does not match effects of dim {}",
            m.dim,
            fam.dim()
        )));
    }
    Ok(fam)
}

/// Rounds every number in a JSON tree to 12 significant digits, in place.
pub fn round_numbers(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    let rounded: f64 = format!("{f:.11e}").parse().expect("formatted float");
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *n = num;
                    }
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_numbers),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

/// Serialises any value with numbers rounded to 12 significant digits.
pub fn to_string_rounded<T: Serialize>(value: &T, pretty: bool) -> Result<String> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    round_numbers(&mut v);
    let out = if pretty {
        serde_json::to_string_pretty(&v)
    } else {
        serde_json::to_string(&v)
    };
    out.map_err(|e| Error::Schema(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::discord_creating_phi;
    use crate::qmath::max_abs_diff;
    use crate::sample;
    use crate::states;

    #[test]
    fn state_round_trip_preserves_the_matrix() {
        let mut r = sample::rng(3, 0);
        let rho = sample::random_density(&mut r, 2, 3);
        let json = serde_json::to_string(&state_to_json(&rho)).unwrap();
        let back: StateJson = serde_json::from_str(&json).unwrap();
        let rho2 = state_from_json(&back).unwrap();
        assert_eq!(rho2.dim_a(), 2);
        assert_eq!(rho2.dim_b(), 3);
        assert!(max_abs_diff(rho.matrix(), rho2.matrix()) < 1e-15);
    }

    #[test]
    fn state_schema_violations_are_reported() {
        let mut s = state_to_json(&states::werner(0.5).unwrap());
        s.dim_b = 3;
        assert!(matches!(state_from_json(&s), Err(Error::Schema(_))));

        let mut s = state_to_json(&states::werner(0.5).unwrap());
        s.matrix.re[0][0] += 0.5; // breaks the unit trace
        assert!(state_from_json(&s).is_err());
    }

    #[test]
    fn box_round_trip_preserves_probabilities() {
        let mut r = sample::rng(5, 1);
        let rho = sample::random_density(&mut r, 2, 2);
        let fam = sample::random_qubit_povms(&mut r, 2);
        let bx = crate::boxes::born_box(&rho, &fam, &fam).unwrap();
        let back = box_from_json(&box_to_json(&bx)).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        assert!((bx.prob(a, b, x, y) - back.prob(a, b, x, y)).abs() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn channel_round_trip_preserves_the_action() {
        let ch = discord_creating_phi();
        let back = channel_from_json(&channel_to_json(&ch)).unwrap();
        let mut r = sample::rng(7, 2);
        let rho = sample::random_density(&mut r, 2, 1);
        let lhs = ch.apply(&rho).unwrap();
        let rhs = back.apply(&rho).unwrap();
        assert!(max_abs_diff(lhs.matrix(), rhs.matrix()) < 1e-15);
    }

    #[test]
    fn measurement_round_trip_and_dim_check() {
        let mut r = sample::rng(9, 3);
        let fam = sample::random_qubit_povms(&mut r, 2);
        let mut j = measurement_to_json(&fam);
        let back = measurement_from_json(&j).unwrap();
        for x in 0..2 {
            for a in 0..2 {
                assert!(max_abs_diff(fam.effect(x, a), back.effect(x, a)) < 1e-15);
            }
        }
        j.dim = 3;
        assert!(matches!(measurement_from_json(&j), Err(Error::Schema(_))));
    }

    #[test]
    fn pure_state_loader_rejects_mixed_inputs() {
        let phi = DensityMatrix::from_pure(&states::phi_plus(), 2, 2).unwrap();
        let psi = pure_from_json(&state_to_json(&phi)).unwrap();
        assert!((psi.overlap(&states::phi_plus()).norm() - 1.0).abs() < 1e-10);

        let mixed = state_to_json(&states::werner(0.5).unwrap());
        assert!(matches!(pure_from_json(&mixed), Err(Error::Schema(_))));
    }

    #[test]
    fn rounding_clips_to_twelve_significant_digits() {
        let mut v = serde_json::json!({
            "x": std::f64::consts::PI,
            "nested": [1.0 / 3.0, { "y": 2.0_f64.sqrt() }],
            "kept": 42
        });
        round_numbers(&mut v);
        assert_eq!(v["x"].as_f64().unwrap(), 3.14159265359);
        assert_eq!(v["nested"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["nested"][1]["y"].as_f64().unwrap(), 1.41421356237);
        assert_eq!(v["kept"].as_i64().unwrap(), 42);
    }
}
