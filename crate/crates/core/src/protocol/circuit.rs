use std::collections::BTreeMap;

use super::wire::CircuitWire;
use crate::optics::ModeUnitary;
use crate::{Error, Result};

/// Tolerance for "acts as the identity on the measured mode".
const BRANCH_IDENTITY_TOL: f64 = 1e-10;

/// Bob's computation: a stage-1 unitary and, for adaptive runs, the
/// measured mode and one stage-2 unitary per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub stage1: ModeUnitary,
    pub measured_mode: Option<usize>,
    pub branches: BTreeMap<usize, ModeUnitary>,
}

impl Circuit {
    pub fn passive(stage1: ModeUnitary) -> Self {
        Self { stage1, measured_mode: None, branches: BTreeMap::new() }
    }

    pub fn adaptive(stage1: ModeUnitary, measured_mode: usize, branches: BTreeMap<usize, ModeUnitary>) -> Result<Self> {
        let c = Self { stage1, measured_mode: Some(measured_mode), branches };
        c.validate()?;
        Ok(c)
    }

    pub fn modes(&self) -> usize {
        self.stage1.m()
    }

    pub fn is_adaptive(&self) -> bool {
        self.measured_mode.is_some()
    }

    /// Branch unitaries must leave the measured mode alone: the measured
    /// mode is already decrypted, so the residual key has to stay zero there.
    pub fn validate(&self) -> Result<()> {
        let m = self.modes();
        match (self.measured_mode, self.branches.is_empty()) {
            (Some(_), true) => return Err(Error::InvalidParameter("adaptive circuit without branch unitaries".into())),
            (None, false) => return Err(Error::InvalidParameter("branch unitaries given without a measured mode".into())),
            _ => {}
        }
        if let Some(k) = self.measured_mode {
            if k >= m {
                return Err(Error::InvalidParameter(format!("measured mode {k} out of range for {m} modes")));
            }
        }
        for (&outcome, u) in &self.branches {
            if u.m() != m {
                return Err(Error::DimensionMismatch { expected: m, found: u.m() });
            }
            let k = self.measured_mode.expect("checked above");
            let off = (0..m)
                .map(|j| {
                    let delta = if j == k { 1.0 } else { 0.0 };
                    (u.get(k, j) - delta).norm().max((u.get(j, k) - delta).norm())
                })
                .fold(0.0, f64::max);
            if off > BRANCH_IDENTITY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "branch unitary for outcome {outcome} mixes the measured mode {k} (deviation {off:.3e})"
                )));
            }
        }
        Ok(())
    }

    pub fn to_wire(&self) -> CircuitWire {
        CircuitWire {
            stage1: self.stage1.to_file(),
            measured_mode: self.measured_mode,
            branches: self.branches.iter().map(|(o, u)| (*o, u.to_file())).collect(),
        }
    }

    pub fn from_wire(w: &CircuitWire) -> Result<Self> {
        let c = Self {
            stage1: ModeUnitary::from_file(&w.stage1)?,
            measured_mode: w.measured_mode,
            branches: w
                .branches
                .iter()
                .map(|(o, u)| Ok((*o, ModeUnitary::from_file(u)?)))
                .collect::<Result<_>>()?,
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn branch_must_fix_measured_mode() {
        let bs = ModeUnitary::beamsplitter(PI / 4.0);
        let mut ok = BTreeMap::new();
        ok.insert(0, ModeUnitary::identity(2));
        ok.insert(1, ModeUnitary::phase_shifter(PI).embed(&[0], 2).unwrap());
        Circuit::adaptive(bs.clone(), 1, ok).unwrap();

        let mut mixing = BTreeMap::new();
        mixing.insert(0, bs.clone());
        assert!(Circuit::adaptive(bs.clone(), 1, mixing).is_err());
        assert!(Circuit::adaptive(bs.clone(), 1, BTreeMap::new()).is_err());
        let mut wrong_size = BTreeMap::new();
        wrong_size.insert(0, ModeUnitary::identity(3));
        assert!(Circuit::adaptive(bs, 1, wrong_size).is_err());
    }

    #[test]
    fn wire_round_trip() {
        let mut br = BTreeMap::new();
        br.insert(0, ModeUnitary::identity(3));
        br.insert(2, ModeUnitary::haar_random(2, 5).embed(&[1, 2], 3).unwrap());
        let c = Circuit::adaptive(ModeUnitary::haar_random(3, 1), 0, br).unwrap();
        assert_eq!(Circuit::from_wire(&c.to_wire()).unwrap(), c);
    }
}
