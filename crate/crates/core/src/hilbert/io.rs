//! JSON form of a transition system: complex entries as `[re, im]` pairs,
//! matrices as row-major nested arrays.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SystemOptions, SystemParts, TransitionSystem};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub hamiltonian: MatrixDoc,
    #[serde(rename = "projector_P")]
    pub projector_p: MatrixDoc,
    pub outcomes: BTreeMap<String, MatrixDoc>,
    pub rho0: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<MatrixDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_int: Option<MatrixDoc>,
}

pub fn matrix_from_doc(name: &str, doc: &MatrixDoc) -> Result<CMatrix> {
    let rows = doc.len();
    let cols = doc.first().map_or(0, Vec::len);
    if doc.iter().any(|r| r.len() != cols) {
        return Err(Error::invariant(format!("{name}: rows have unequal lengths")));
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        let [re, im] = doc[r][c];
        Complex64::new(re, im)
    }))
}

pub fn matrix_to_doc(m: &CMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

impl SystemDocument {
    pub fn to_parts(&self) -> Result<SystemParts> {
        let split = match (&self.h0, &self.h_int) {
            (Some(a), Some(b)) => Some((matrix_from_doc("h0", a)?, matrix_from_doc("h_int", b)?)),
            (None, None) => None,
            _ => return Err(Error::invariant("h0 and h_int must be given together")),
        };
        let outcomes = self
            .outcomes
            .iter()
            .map(|(k, v)| Ok((k.clone(), matrix_from_doc(&format!("outcome '{k}'"), v)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SystemParts {
            hamiltonian: matrix_from_doc("hamiltonian", &self.hamiltonian)?,
            projector_p: matrix_from_doc("projector_P", &self.projector_p)?,
            outcomes,
            rho0: matrix_from_doc("rho0", &self.rho0)?,
            split,
        })
    }

    pub fn build(&self, options: SystemOptions) -> Result<TransitionSystem> {
        TransitionSystem::new(self.to_parts()?, options)
    }

    pub fn from_system(sys: &TransitionSystem) -> Self {
        let outcomes = sys
            .labels()
            .map(|l| (l.to_string(), matrix_to_doc(sys.outcome_operator(l).unwrap())))
            .collect();
        let (h0, h_int) = match sys.split() {
            Some((a, b)) => (Some(matrix_to_doc(a)), Some(matrix_to_doc(b))),
            None => (None, None),
        };
        SystemDocument {
            hamiltonian: matrix_to_doc(sys.hamiltonian()),
            projector_p: matrix_to_doc(sys.projector_p()),
            outcomes,
            rho0: matrix_to_doc(sys.rho0()),
            h0,
            h_int,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::models;

    #[test]
    fn round_trip() {
        let sys = models::random_four_level(3, 0.05).unwrap();
        let doc = SystemDocument::from_system(&sys);
        let text = serde_json::to_string(&doc).unwrap();
        let back: SystemDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc, back);
        let rebuilt = back.build(*sys.options()).unwrap();
        assert_eq!(rebuilt.hamiltonian(), sys.hamiltonian());
    }

    #[test]
    fn unknown_field_rejected() {
        let text = r#"{"hamiltonian":[[[0,0]]],"projector_P":[[[0,0]]],"outcomes":{},"rho0":[[[1,0]]],"extra":1}"#;
        assert!(serde_json::from_str::<SystemDocument>(text).is_err());
    }

    #[test]
    fn empty_outcomes_name_the_sum_rule() {
        let text = r#"{"hamiltonian":[[[0,0],[1,0]],[[1,0],[0,0]]],
            "projector_P":[[[0,0],[0,0]],[[0,0],[1,0]]],"outcomes":{},
            "rho0":[[[1,0],[0,0]],[[0,0],[0,0]]]}"#;
        let doc: SystemDocument = serde_json::from_str(text).unwrap();
        let err = doc.build(SystemOptions::default()).unwrap_err();
        assert!(err.to_string().contains("Σ_λ P_λ = P"), "{err}");
    }
}
