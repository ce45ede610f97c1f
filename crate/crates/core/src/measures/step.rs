//! Piecewise-constant (purely atomic) probability measures on the real line,
//! the distribution of rank jumps of a minima filtration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-12;
const TIE_TOLERANCE: f64 = 1e-12;

/// Moment functionals of a step measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMomentKind {
    Mean,
    PositivePartMean,
    SupSupport,
}

/// Atomic probability measure with mass at the jump locations of a rank
/// function; ties merge into a single atom.
#[derive(Debug, Clone, PartialEq)]
pub struct StepMeasure {
    // strictly increasing t with positive masses summing to 1
    steps: Vec<(f64, f64)>,
}

impl StepMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("step measure with no atoms".into()));
        }
        if atoms
            .iter()
            .any(|&(t, m)| !t.is_finite() || m <= 0.0 || !m.is_finite())
        {
            return Err(Error::InvalidInput(
                "step atoms need finite locations and positive masses".into(),
            ));
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(atoms.len());
        for (t, m) in atoms {
            match merged.last_mut() {
                Some((tl, ml)) if (t - *tl).abs() <= TIE_TOLERANCE => *ml += m,
                _ => merged.push((t, m)),
            }
        }
        let total: f64 = merged.iter().map(|&(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!(
                "step masses sum to {total}, not 1"
            )));
        }
        Ok(StepMeasure { steps: merged })
    }

    pub fn dirac(t: f64) -> Self {
        StepMeasure {
            steps: vec![(t, 1.0)],
        }
    }

    pub fn steps(&self) -> &[(f64, f64)] {
        &self.steps
    }

    /// Exact integral against the step representation.
    pub fn moment(&self, kind: StepMomentKind) -> f64 {
        match kind {
            StepMomentKind::Mean => self.steps.iter().map(|&(t, m)| t * m).sum(),
            StepMomentKind::PositivePartMean => {
                self.steps.iter().map(|&(t, m)| t.max(0.0) * m).sum()
            }
            StepMomentKind::SupSupport => self.steps.last().map(|&(t, _)| t).unwrap(),
        }
    }

    /// Additive translation of the support.
    pub fn translate(&self, c: f64) -> Self {
        StepMeasure {
            steps: self.steps.iter().map(|&(t, m)| (t + c, m)).collect(),
        }
    }

    pub fn to_json(&self) -> StepMeasureJson {
        StepMeasureJson {
            steps: self
                .steps
                .iter()
                .map(|&(t, mass)| StepJson { t, mass })
                .collect(),
        }
    }

    pub fn from_json(json: &StepMeasureJson) -> Result<Self> {
        Self::new(json.steps.iter().map(|s| (s.t, s.mass)).collect())
    }

    /// CSV rows `t,mass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mass\n");
        for &(t, m) in &self.steps {
            out.push_str(&format!("{t:?},{m:?}\n"));
        }
        out
    }
}

/// Serialized form `{"steps":[{"t":...,"mass":...}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepMeasureJson {
    pub steps: Vec<StepJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepJson {
    pub t: f64,
    pub mass: f64,
}

/// Exact order-1 transport distance on the line between two step measures,
/// the integral of |F_a - F_b|.
pub fn wasserstein_line(a: &StepMeasure, b: &StepMeasure) -> f64 {
    let mut events: Vec<f64> = a
        .steps
        .iter()
        .map(|&(t, _)| t)
        .chain(b.steps.iter().map(|&(t, _)| t))
        .collect();
    events.sort_by(|x, y| x.partial_cmp(y).unwrap());
    events.dedup();
    let mut dist = 0.0;
    let mut fa = 0.0;
    let mut fb = 0.0;
    for w in events.windows(2) {
        fa += mass_at(a, w[0]);
        fb += mass_at(b, w[0]);
        dist += (fa - fb).abs() * (w[1] - w[0]);
    }
    dist
}

fn mass_at(m: &StepMeasure, t: f64) -> f64 {
    m.steps
        .iter()
        .find(|&&(s, _)| s == t)
        .map(|&(_, mass)| mass)
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_moments() {
        let d = StepMeasure::dirac(0.0);
        assert_eq!(d.moment(StepMomentKind::Mean), 0.0);
        assert_eq!(d.moment(StepMomentKind::PositivePartMean), 0.0);
        assert_eq!(d.moment(StepMomentKind::SupSupport), 0.0);
    }

    #[test]
    fn two_point_moments() {
        let m = StepMeasure::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(m.moment(StepMomentKind::Mean), 0.0);
        assert_eq!(m.moment(StepMomentKind::PositivePartMean), 0.5);
        assert_eq!(m.moment(StepMomentKind::SupSupport), 1.0);
    }

    #[test]
    fn ties_merge() {
        let m = StepMeasure::new(vec![(0.25, 0.5), (0.25, 0.25), (1.0, 0.25)]).unwrap();
        assert_eq!(m.steps().len(), 2);
        assert_eq!(m.steps()[0], (0.25, 0.75));
    }

    #[test]
    fn translate_shifts_all_moments() {
        let m = StepMeasure::new(vec![(-0.5, 0.25), (0.0, 0.5), (2.0, 0.25)]).unwrap();
        let c = 0.7;
        let t = m.translate(c);
        assert!(
            (t.moment(StepMomentKind::Mean) - m.moment(StepMomentKind::Mean) - c).abs() < 1e-15
        );
        assert!(
            (t.moment(StepMomentKind::SupSupport) - m.moment(StepMomentKind::SupSupport) - c).abs()
                < 1e-15
        );
    }

    #[test]
    fn chain_inequality_on_step_data() {
        // sup-support >= mean always; the positive-part chain needs
        // sup-support >= 0
        let m = StepMeasure::new(vec![(-2.0, 0.5), (1.0, 0.5)]).unwrap();
        let sup = m.moment(StepMomentKind::SupSupport);
        let pos = m.moment(StepMomentKind::PositivePartMean);
        let mean = m.moment(StepMomentKind::Mean);
        assert!(sup >= pos && pos >= mean);
        let below = StepMeasure::dirac(-1.0);
        assert!(
            below.moment(StepMomentKind::SupSupport)
                < below.moment(StepMomentKind::PositivePartMean)
        );
    }

    #[test]
    fn line_distance_exact() {
        let a = StepMeasure::dirac(0.0);
        let b = StepMeasure::dirac(1.0);
        assert!((wasserstein_line(&a, &b) - 1.0).abs() < 1e-15);
        let c = StepMeasure::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!((wasserstein_line(&a, &c) - 0.5).abs() < 1e-15);
        assert_eq!(wasserstein_line(&c, &c), 0.0);
    }

    #[test]
    fn json_roundtrip() {
        let m = StepMeasure::new(vec![(0.0, 0.25), (0.5, 0.75)]).unwrap();
        let json = serde_json::to_string(&m.to_json()).unwrap();
        assert!(json.contains("\"steps\""));
        let back = StepMeasure::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(m, back);
    }
}
