//! JSON scenario files.
//!
//! Complex numbers are two-element `[re, im]` arrays and matrices are
//! row-major nested arrays. Indices are 0-based and angles are in radians.
//!
//! ```json
//! {
//!   "dim": 2,
//!   "generators": [[[[0,0],[1,0]],[[1,0],[0,0]]]],
//!   "initial_state": [[1,0],[0,0]],
//!   "theta_true": [0.3],
//!   "theta_guess": [0.3],
//!   "t": 0.5
//! }
//! ```

use serde::{Deserialize, Serialize};

use crate::circuit::{EncodingCircuit, ParamVector, PureState};
use crate::error::{Error, Result};
use crate::fisher::Povm;
use crate::linalg::{CMatrix, CVector, Hermitian, RMatrix, C64};

pub type ComplexEntry = [f64; 2];
pub type ComplexRows = Vec<Vec<ComplexEntry>>;

pub const DEFAULT_BATCHES: usize = 200;

/// Serialized form of a run, as read from disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub dim: usize,
    /// In application order.
    pub generators: Vec<ComplexRows>,
    pub initial_state: Vec<ComplexEntry>,
    pub theta_true: Vec<f64>,
    pub theta_guess: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kd_pair: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<Vec<ComplexRows>>,
    /// Explicit postselection effect for the KD analysis; overrides the
    /// filter built from `theta_guess` and `t`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub postselection: Option<ComplexRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batches: Option<usize>,
}

/// Validated scenario ready for computation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub description: Option<String>,
    pub circuit: EncodingCircuit,
    pub theta_true: ParamVector,
    pub theta_guess: ParamVector,
    pub t: Option<f64>,
    pub weight: RMatrix,
    pub kd_pair: Option<(usize, usize)>,
    pub povm: Option<Povm>,
    pub postselection: Option<CMatrix>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub batches: usize,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialization cannot fail")
    }

    pub fn validate(&self) -> Result<Scenario> {
        let dim = self.dim;
        if dim == 0 {
            return Err(Error::Invalid("dimension must be positive".into()).at("dim"));
        }
        if self.generators.is_empty() {
            return Err(Error::Invalid("at least one generator is required".into()).at("generators"));
        }
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(m, rows)| {
                let path = format!("generators[{m}]");
                let matrix = complex_matrix(rows, dim, &path)?;
                Hermitian::new(matrix).map_err(|e| e.at(path))
            })
            .collect::<Result<Vec<_>>>()?;
        let params = generators.len();

        if self.initial_state.len() != dim {
            return Err(Error::dim("state", dim, self.initial_state.len()).at("initial_state"));
        }
        let amplitudes = self
            .initial_state
            .iter()
            .enumerate()
            .map(|(k, z)| complex(z, &format!("initial_state[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        let state = PureState::new(CVector::from_vec(amplitudes)).map_err(|e| e.at("initial_state"))?;

        let theta_true = params_field(&self.theta_true, params, "theta_true")?;
        let theta_guess = params_field(&self.theta_guess, params, "theta_guess")?;

        if let Some(t) = self.t {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::Invalid(format!("transmissivity {t} outside (0, 1]")).at("t"));
            }
        }

        let weight = match &self.weight {
            None => RMatrix::identity(params, params),
            Some(rows) => real_matrix(rows, params, "weight")?,
        };

        let kd_pair = match self.kd_pair {
            None => None,
            Some([i, j]) => {
                for (slot, index) in [(0, i), (1, j)] {
                    if index >= params {
                        return Err(Error::IndexOutOfRange { index, len: params }.at(format!("kd_pair[{slot}]")));
                    }
                }
                Some((i, j))
            }
        };

        let povm = match &self.povm {
            None => None,
            Some(effects) => {
                let matrices = effects
                    .iter()
                    .enumerate()
                    .map(|(k, rows)| complex_matrix(rows, dim, &format!("povm[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                Some(Povm::new(matrices).map_err(|e| e.at("povm"))?)
            }
        };

        let postselection = match &self.postselection {
            None => None,
            Some(rows) => {
                let effect = complex_matrix(rows, dim, "postselection")?;
                Povm::two_outcome(effect.clone()).map_err(|e| e.at("postselection"))?;
                Some(effect)
            }
        };

        if self.trials == Some(0) {
            return Err(Error::Invalid("number of trials must be positive".into()).at("trials"));
        }
        let batches = self.batches.unwrap_or(DEFAULT_BATCHES);
        if batches == 0 {
            return Err(Error::Invalid("number of batches must be positive".into()).at("batches"));
        }

        let circuit = EncodingCircuit::new(generators, state).map_err(|e| e.at("generators"))?;
        Ok(Scenario {
            description: self.description.clone(),
            circuit,
            theta_true,
            theta_guess,
            t: self.t,
            weight,
            kd_pair,
            povm,
            postselection,
            trials: self.trials,
            seed: self.seed,
            batches,
        })
    }
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        ScenarioConfig::from_json(text)?.validate()
    }

    /// Transmissivity, or a validation error naming the missing field.
    pub fn require_t(&self) -> Result<f64> {
        self.t.ok_or_else(|| Error::Invalid("required for this command".into()).at("t"))
    }

    pub fn require_kd_pair(&self) -> Result<(usize, usize)> {
        self.kd_pair
            .ok_or_else(|| Error::Invalid("required for this command".into()).at("kd_pair"))
    }

    pub fn require_povm(&self) -> Result<&Povm> {
        self.povm
            .as_ref()
            .ok_or_else(|| Error::Invalid("required for this command".into()).at("povm"))
    }

    pub fn require_trials(&self) -> Result<u64> {
        self.trials
            .ok_or_else(|| Error::Invalid("required for this command".into()).at("trials"))
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Invalid("required for this command".into()).at("seed"))
    }
}

fn complex(z: &ComplexEntry, path: &str) -> Result<C64> {
    if !(z[0].is_finite() && z[1].is_finite()) {
        return Err(Error::NonFinite("complex entry".into()).at(path));
    }
    Ok(C64::new(z[0], z[1]))
}

fn complex_matrix(rows: &ComplexRows, dim: usize, path: &str) -> Result<CMatrix> {
    if rows.len() != dim {
        return Err(Error::dim("matrix rows", dim, rows.len()).at(path));
    }
    let mut out = CMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::dim("matrix columns", dim, row.len()).at(format!("{path}[{r}]")));
        }
        for (c, z) in row.iter().enumerate() {
            out[(r, c)] = complex(z, &format!("{path}[{r}][{c}]"))?;
        }
    }
    Ok(out)
}

fn real_matrix(rows: &[Vec<f64>], dim: usize, path: &str) -> Result<RMatrix> {
    if rows.len() != dim {
        return Err(Error::dim("matrix rows", dim, rows.len()).at(path));
    }
    let mut out = RMatrix::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::dim("matrix columns", dim, row.len()).at(format!("{path}[{r}]")));
        }
        for (c, x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite("entry".into()).at(format!("{path}[{r}][{c}]")));
            }
            out[(r, c)] = *x;
        }
    }
    Ok(out)
}

fn params_field(values: &[f64], params: usize, path: &str) -> Result<ParamVector> {
    if values.len() != params {
        return Err(Error::dim("parameter count", params, values.len()).at(path));
    }
    if let Some(k) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite("parameter".into()).at(format!("{path}[{k}]")));
    }
    Ok(ParamVector(values.to_vec()))
}

/// Encode a complex matrix in the file layout.
pub fn encode_matrix(m: &CMatrix) -> ComplexRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn encode_vector(v: &CVector) -> Vec<ComplexEntry> {
    v.iter().map(|z| [z.re, z.im]).collect()
}
