//! Catalog of cost functions `C(·)` and their paired activation functions `T_λ(·)`.
//!
//! Every pair satisfies `λ C'(T_λ(u)) = u − T_λ(u)` away from dead zones and kinks, which is
//! what makes the network energy non-increasing along the LCA trajectory. An
//! [`ActivationSpec`] is the single description used both to evaluate the cost (for energies)
//! and to apply the activation (inside the solvers).

mod lp_fit;
pub mod oracle;
mod reweight;
mod scalar;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use lp_fit::{fit_lp_params, LpFit, LpRegime, FIT_GRID_POINTS};
pub use reweight::{weight_update_l1, weight_update_l2};
pub use scalar::{activation_block, hard_threshold, log_barrier_activation, soft_threshold};

/// Cost family and its shape parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `|a|`, soft threshold.
    L1,
    /// Number of non-zeros, hard threshold at `λ`.
    L0,
    /// `cs·log(1 + |a|/s)`, approximating `|a|^p` for `p < 1`.
    ApproxLpLow { c: f64, s: f64 },
    /// `c|a| − cs·log(1 + |a|/s)`, approximating `|a|^p` for `1 < p ≤ 2`.
    ApproxLpHigh { c: f64, s: f64 },
    /// Smoothly clipped absolute deviation, transition width `κ ≥ 2`.
    Scad { kappa: f64 },
    /// `β|a|/(1 + β|a|)`.
    TransformedL1 { beta: f64 },
    /// Quadratic below `ε`, linear above.
    Huber { epsilon: f64 },
    /// Amplitude-scale-invariant Bayes shrinkage (Jeffreys prior).
    Asib,
    /// Sum of ℓ2 norms over disjoint groups.
    BlockL1 { groups: Vec<Vec<usize>> },
    /// `a − log(a)/(γλ)` on the nonnegative extended variables; activation is one-sided.
    LogBarrier { gamma: f64 },
    /// `Σ w_i |a_i|`; node `i` thresholds at `λ w_i`.
    WeightedL1 { weights: Vec<f64> },
    /// `Σ w_i a_i²`; node `i` has linear gain `1/(1 + 2λ w_i)`.
    WeightedL2 { weights: Vec<f64> },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::L1 => "L1",
            Family::L0 => "L0",
            Family::ApproxLpLow { .. } => "APPROX_LP_LOW",
            Family::ApproxLpHigh { .. } => "APPROX_LP_HIGH",
            Family::Scad { .. } => "SCAD",
            Family::TransformedL1 { .. } => "TRANSFORMED_L1",
            Family::Huber { .. } => "HUBER",
            Family::Asib => "ASIB",
            Family::BlockL1 { .. } => "BLOCK_L1",
            Family::LogBarrier { .. } => "LOG_BARRIER",
            Family::WeightedL1 { .. } => "WEIGHTED_L1",
            Family::WeightedL2 { .. } => "WEIGHTED_L2",
        }
    }

    /// Catalog names, in declaration order.
    pub const NAMES: [&'static str; 12] = [
        "L1",
        "L0",
        "APPROX_LP_LOW",
        "APPROX_LP_HIGH",
        "SCAD",
        "TRANSFORMED_L1",
        "HUBER",
        "ASIB",
        "BLOCK_L1",
        "LOG_BARRIER",
        "WEIGHTED_L1",
        "WEIGHTED_L2",
    ];
}

/// A cost family together with the global tradeoff `λ`.
///
/// Dead-zone edges that need a numerical solve (approximate ℓp below one, transformed ℓ1)
/// are computed once at construction and cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile", into = "SpecFile")]
pub struct ActivationSpec {
    family: Family,
    lambda: f64,
    dead_zone: f64,
}

impl ActivationSpec {
    pub fn new(family: Family, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        validate_family(&family)?;
        let dead_zone = match &family {
            Family::L1 | Family::L0 | Family::Scad { .. } | Family::Asib => lambda,
            Family::ApproxLpLow { c, s } => scalar::lp_low_dead_zone(lambda, *c, *s),
            Family::TransformedL1 { beta } => scalar::transformed_l1_dead_zone(lambda, *beta),
            Family::BlockL1 { .. } => lambda,
            _ => 0.0,
        };
        Ok(ActivationSpec {
            family,
            lambda,
            dead_zone,
        })
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        Self::new(Family::L1, lambda)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Same family at a different `λ` (dead zones are recomputed).
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.family.clone(), lambda)
    }

    /// `|u|` at or below which a scalar family outputs exactly zero; 0 for families without a
    /// dead zone. For block families this is the group-norm threshold.
    pub fn dead_zone(&self) -> f64 {
        self.dead_zone
    }

    pub fn is_separable(&self) -> bool {
        !matches!(self.family, Family::BlockL1 { .. })
    }

    /// Whether `½‖y − Φa‖² + λC(a)` is convex for every `Φ`.
    pub fn is_convex(&self) -> bool {
        matches!(
            self.family,
            Family::L1
                | Family::ApproxLpHigh { .. }
                | Family::Huber { .. }
                | Family::BlockL1 { .. }
                | Family::LogBarrier { .. }
                | Family::WeightedL1 { .. }
                | Family::WeightedL2 { .. }
        )
    }

    /// Families whose optimality can be certified by the ℓ1-type duality gap.
    pub fn has_duality_gap(&self) -> bool {
        matches!(
            self.family,
            Family::L1 | Family::WeightedL1 { .. } | Family::BlockL1 { .. }
        )
    }

    /// Whether the activation is continuous in `u` (no jump out of the dead zone).
    pub fn is_continuous(&self) -> bool {
        match &self.family {
            Family::L0 => false,
            Family::ApproxLpLow { c, s } => self.lambda * c <= *s,
            Family::TransformedL1 { beta } => 2.0 * self.lambda * beta * beta <= 1.0,
            _ => true,
        }
    }

    /// Whether the activation is odd in `u`. Only the one-sided log-barrier family is not.
    pub fn is_odd(&self) -> bool {
        !matches!(self.family, Family::LogBarrier { .. })
    }

    /// Per-node weight multipliers, for weighted families.
    pub fn weights(&self) -> Option<&[f64]> {
        match &self.family {
            Family::WeightedL1 { weights } | Family::WeightedL2 { weights } => Some(weights),
            _ => None,
        }
    }

    pub fn groups(&self) -> Option<&[Vec<usize>]> {
        match &self.family {
            Family::BlockL1 { groups } => Some(groups),
            _ => None,
        }
    }

    /// Number of nodes the activation is tied to, if any (weighted and block families).
    pub fn required_len(&self) -> Option<usize> {
        match &self.family {
            Family::WeightedL1 { weights } | Family::WeightedL2 { weights } => Some(weights.len()),
            Family::BlockL1 { groups } => Some(groups.iter().map(Vec::len).sum()),
            _ => None,
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        match self.required_len() {
            Some(expected) if expected != len => Err(Error::DimensionMismatch {
                expected,
                got: len,
                context: "activation spec size",
            }),
            _ => Ok(()),
        }
    }

    /// `T_λ(u)` for one node of a separable family.
    ///
    /// # Panics
    /// On the block family, which is not pointwise.
    pub fn activate_scalar(&self, u: f64, node: usize) -> f64 {
        let lambda = self.lambda;
        let odd = |f: &dyn Fn(f64) -> f64| if u < 0.0 { -f(-u) } else { f(u) };
        match &self.family {
            Family::L1 => soft_threshold(u, lambda),
            Family::L0 => hard_threshold(u, lambda),
            Family::ApproxLpLow { c, s } => odd(&|x| {
                if x <= self.dead_zone {
                    0.0
                } else {
                    scalar::lp_low_branch(x, lambda, *c, *s).unwrap_or(0.0)
                }
            }),
            Family::ApproxLpHigh { c, s } => {
                odd(&|x| scalar::lp_high_activation(x, lambda, *c, *s))
            }
            Family::Scad { kappa } => odd(&|x| scalar::scad_activation(x, lambda, *kappa)),
            Family::TransformedL1 { beta } => odd(&|x| {
                if x <= self.dead_zone {
                    0.0
                } else {
                    scalar::tl1_branch(x, lambda, *beta).unwrap_or(0.0)
                }
            }),
            Family::Huber { epsilon } => odd(&|x| scalar::huber_activation(x, lambda, *epsilon)),
            Family::Asib => odd(&|x| scalar::asib_activation(x, lambda)),
            Family::LogBarrier { gamma } => log_barrier_activation(u, lambda, *gamma),
            Family::WeightedL1 { weights } => soft_threshold(u, lambda * weights[node]),
            Family::WeightedL2 { weights } => u / (1.0 + 2.0 * lambda * weights[node]),
            Family::BlockL1 { .. } => panic!("block activation is not pointwise"),
        }
    }

    /// `C` restricted to one coordinate, `+∞` outside the family's domain.
    ///
    /// # Panics
    /// On the block family.
    pub fn scalar_cost(&self, a: f64, node: usize) -> f64 {
        let x = a.abs();
        match &self.family {
            Family::L1 => x,
            Family::L0 => {
                if a != 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Family::ApproxLpLow { c, s } => scalar::lp_low_cost(x, *c, *s),
            Family::ApproxLpHigh { c, s } => scalar::lp_high_cost(x, *c, *s),
            Family::Scad { kappa } => scalar::scad_cost(x, self.lambda, *kappa),
            Family::TransformedL1 { beta } => scalar::transformed_l1_cost(x, *beta),
            Family::Huber { epsilon } => scalar::huber_cost(x, *epsilon),
            Family::Asib => scalar::asib_cost(x, self.lambda),
            Family::LogBarrier { gamma } => {
                if a > 0.0 {
                    a - a.ln() / (gamma * self.lambda)
                } else {
                    f64::INFINITY
                }
            }
            Family::WeightedL1 { weights } => weights[node] * x,
            Family::WeightedL2 { weights } => weights[node] * a * a,
            Family::BlockL1 { .. } => panic!("block cost is not separable"),
        }
    }

    /// `T_λ(u)` for a full state vector.
    pub fn activation(&self, u: &[f64]) -> Result<Vec<f64>> {
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("state must be finite".into()));
        }
        let mut out = vec![0.0; u.len()];
        self.activate_into(u, &mut out)?;
        Ok(out)
    }

    /// In-place form of [`ActivationSpec::activation`] used by the solvers.
    pub fn activate_into(&self, u: &[f64], out: &mut [f64]) -> Result<()> {
        self.check_len(u.len())?;
        if out.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: u.len(),
                got: out.len(),
                context: "activation output",
            });
        }
        match &self.family {
            Family::BlockL1 { groups } => {
                let mut buf_u = Vec::new();
                let mut buf_a = Vec::new();
                for g in groups {
                    buf_u.clear();
                    buf_u.extend(g.iter().map(|&i| u[i]));
                    buf_a.resize(g.len(), 0.0);
                    scalar::block_into(&buf_u, self.lambda, &mut buf_a);
                    for (&i, &v) in g.iter().zip(&buf_a) {
                        out[i] = v;
                    }
                }
            }
            Family::L1 => {
                for (o, &v) in out.iter_mut().zip(u) {
                    *o = soft_threshold(v, self.lambda);
                }
            }
            _ => {
                for (i, (o, &v)) in out.iter_mut().zip(u).enumerate() {
                    *o = self.activate_scalar(v, i);
                }
            }
        }
        Ok(())
    }

    /// `C(a)`; separable families sum per-coordinate costs, the block family sums group norms.
    pub fn cost_value(&self, a: &[f64]) -> Result<f64> {
        self.check_len(a.len())?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("coefficients must be finite".into()));
        }
        let total = match &self.family {
            Family::BlockL1 { groups } => groups
                .iter()
                .map(|g| g.iter().map(|&i| a[i] * a[i]).sum::<f64>().sqrt())
                .sum(),
            Family::LogBarrier { .. } => {
                if let Some(v) = a.iter().find(|&&v| v <= 0.0) {
                    return Err(Error::Domain(format!(
                        "log-barrier cost is undefined at a = {v} (extended variables must be positive)"
                    )));
                }
                a.iter()
                    .enumerate()
                    .map(|(i, &v)| self.scalar_cost(v, i))
                    .sum()
            }
            _ => a
                .iter()
                .enumerate()
                .map(|(i, &v)| self.scalar_cost(v, i))
                .sum(),
        };
        Ok(total)
    }
}

fn validate_family(family: &Family) -> Result<()> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{name} must be positive and finite, got {v}"
            )))
        }
    };
    match family {
        Family::L1 | Family::L0 | Family::Asib => Ok(()),
        Family::ApproxLpLow { c, s } | Family::ApproxLpHigh { c, s } => {
            positive("c", *c)?;
            positive("s", *s)
        }
        Family::Scad { kappa } => {
            if *kappa >= 2.0 && kappa.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "SCAD requires kappa >= 2, got {kappa}"
                )))
            }
        }
        Family::TransformedL1 { beta } => positive("beta", *beta),
        Family::Huber { epsilon } => positive("epsilon", *epsilon),
        Family::LogBarrier { gamma } => positive("gamma", *gamma),
        Family::WeightedL1 { weights } | Family::WeightedL2 { weights } => {
            if weights.is_empty() {
                return Err(Error::InvalidParameter("weights must be non-empty".into()));
            }
            weights.iter().try_for_each(|&w| positive("weight", w))
        }
        Family::BlockL1 { groups } => {
            let n: usize = groups.iter().map(Vec::len).sum();
            let mut seen = vec![false; n];
            for g in groups {
                if g.is_empty() {
                    return Err(Error::InvalidParameter("empty group".into()));
                }
                for &i in g {
                    if i >= n || std::mem::replace(&mut seen[i], true) {
                        return Err(Error::InvalidParameter(
                            "groups must partition 0..n without overlap".into(),
                        ));
                    }
                }
            }
            Ok(())
        }
    }
}

/// JSON form: `{"family": "SCAD", "lambda": 0.5, "params": {"kappa": 3.7}}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecFile {
    pub family: String,
    pub lambda: f64,
    #[serde(default)]
    pub params: SpecParams,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SpecParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<usize>>>,
}

impl From<ActivationSpec> for SpecFile {
    fn from(spec: ActivationSpec) -> Self {
        let mut params = SpecParams::default();
        let name = spec.family.name().to_string();
        match spec.family {
            Family::L1 | Family::L0 | Family::Asib => {}
            Family::ApproxLpLow { c, s } | Family::ApproxLpHigh { c, s } => {
                params.c = Some(c);
                params.s = Some(s);
            }
            Family::Scad { kappa } => params.kappa = Some(kappa),
            Family::TransformedL1 { beta } => params.beta = Some(beta),
            Family::Huber { epsilon } => params.epsilon = Some(epsilon),
            Family::LogBarrier { gamma } => params.gamma = Some(gamma),
            Family::WeightedL1 { weights } | Family::WeightedL2 { weights } => {
                params.weights = Some(weights)
            }
            Family::BlockL1 { groups } => params.groups = Some(groups),
        }
        SpecFile {
            family: name,
            lambda: spec.lambda,
            params,
        }
    }
}

impl TryFrom<SpecFile> for ActivationSpec {
    type Error = Error;

    fn try_from(f: SpecFile) -> Result<Self> {
        fn need<T>(v: Option<T>, family: &str, name: &str) -> Result<T> {
            v.ok_or_else(|| {
                Error::InvalidParameter(format!("{family} requires parameter `{name}`"))
            })
        }
        let p = f.params;
        let fam = f.family.as_str();
        let family = match fam {
            "L1" => Family::L1,
            "L0" => Family::L0,
            "APPROX_LP_LOW" => Family::ApproxLpLow {
                c: need(p.c, fam, "c")?,
                s: need(p.s, fam, "s")?,
            },
            "APPROX_LP_HIGH" => Family::ApproxLpHigh {
                c: need(p.c, fam, "c")?,
                s: need(p.s, fam, "s")?,
            },
            "SCAD" => Family::Scad {
                kappa: need(p.kappa, fam, "kappa")?,
            },
            "TRANSFORMED_L1" => Family::TransformedL1 {
                beta: need(p.beta, fam, "beta")?,
            },
            "HUBER" => Family::Huber {
                epsilon: need(p.epsilon, fam, "epsilon")?,
            },
            "ASIB" => Family::Asib,
            "BLOCK_L1" => Family::BlockL1 {
                groups: need(p.groups, fam, "groups")?,
            },
            "LOG_BARRIER" => Family::LogBarrier {
                gamma: need(p.gamma, fam, "gamma")?,
            },
            "WEIGHTED_L1" => Family::WeightedL1 {
                weights: need(p.weights, fam, "weights")?,
            },
            "WEIGHTED_L2" => Family::WeightedL2 {
                weights: need(p.weights, fam, "weights")?,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown cost family `{other}`"
                )))
            }
        };
        ActivationSpec::new(family, f.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family) -> ActivationSpec {
        ActivationSpec::new(family, 0.5).unwrap()
    }

    #[test]
    fn cost_examples() {
        assert_eq!(spec(Family::L1).cost_value(&[1.0, -2.0, 0.0]).unwrap(), 3.0);
        let scad = spec(Family::Scad { kappa: 3.7 });
        assert!((scad.cost_value(&[10.0]).unwrap() - 1.175).abs() < 1e-15);
        let huber = spec(Family::Huber { epsilon: 0.3 });
        assert!((huber.cost_value(&[0.1]).unwrap() - 0.016666666666666666).abs() < 1e-15);
        let block = spec(Family::BlockL1 {
            groups: vec![vec![0, 2], vec![1]],
        });
        assert!((block.cost_value(&[3.0, -1.0, 4.0]).unwrap() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn zero_cost_at_origin() {
        let families = vec![
            Family::L1,
            Family::L0,
            Family::ApproxLpLow { c: 2.9, s: 0.19 },
            Family::ApproxLpHigh { c: 2.6, s: 0.69 },
            Family::Scad { kappa: 3.7 },
            Family::TransformedL1 { beta: 2.0 },
            Family::Huber { epsilon: 0.3 },
            Family::Asib,
            Family::BlockL1 {
                groups: vec![vec![0, 1], vec![2]],
            },
            Family::WeightedL1 {
                weights: vec![1.0, 2.0, 0.5],
            },
            Family::WeightedL2 {
                weights: vec![1.0, 2.0, 0.5],
            },
        ];
        for f in families {
            for lambda in [0.05, 0.5, 3.0] {
                let s = ActivationSpec::new(f.clone(), lambda).unwrap();
                assert!(
                    s.cost_value(&[0.0; 3]).unwrap().abs() < 1e-15,
                    "{}",
                    f.name()
                );
            }
        }
    }

    #[test]
    fn log_barrier_cost_domain() {
        let s = spec(Family::LogBarrier { gamma: 10.0 });
        assert!(matches!(s.cost_value(&[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(s.cost_value(&[0.5, 1.0]).is_ok());
    }

    #[test]
    fn activation_examples() {
        let l1 = spec(Family::L1);
        assert_eq!(l1.activation(&[0.3, 1.0]).unwrap(), vec![0.0, 0.5]);
        assert!((l1.activate_scalar(-1.2, 0) + 0.7).abs() < 1e-15);

        let scad = spec(Family::Scad { kappa: 3.7 });
        assert!((scad.activate_scalar(0.8, 0) - 0.3).abs() < 1e-15);
        assert_eq!(scad.activate_scalar(5.0, 0), 5.0);

        let asib = spec(Family::Asib);
        assert_eq!(asib.activate_scalar(0.5, 0), 0.0);
        assert!((asib.activate_scalar(1.0, 0) - 0.75).abs() < 1e-15);
        assert!((asib.activate_scalar(-1.0, 0) + 0.75).abs() < 1e-15);

        let w = spec(Family::WeightedL1 {
            weights: vec![1.0, 2.0],
        });
        assert_eq!(w.activation(&[1.0, 1.0]).unwrap(), vec![0.5, 0.0]);
        let w2 = spec(Family::WeightedL2 {
            weights: vec![1.0, 2.0],
        });
        assert_eq!(w2.activation(&[2.0, 3.0]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn exact_dead_zones() {
        for f in [
            Family::L1,
            Family::Scad { kappa: 3.7 },
            Family::Asib,
            Family::TransformedL1 { beta: 2.0 },
            Family::ApproxLpLow { c: 2.9, s: 0.19 },
        ] {
            let s = spec(f);
            let dz = s.dead_zone();
            for k in 0..=100 {
                let u = dz * k as f64 / 100.0;
                assert_eq!(s.activate_scalar(u, 0).to_bits(), 0f64.to_bits());
                assert_eq!(s.activate_scalar(-u, 0), 0.0);
            }
            assert!(s.activate_scalar(dz + 1e-6, 0) > 0.0);
        }
        let block = spec(Family::BlockL1 {
            groups: vec![vec![0, 1]],
        });
        assert_eq!(block.activation(&[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ActivationSpec::new(Family::Scad { kappa: 1.5 }, 0.5).is_err());
        assert!(ActivationSpec::new(Family::Huber { epsilon: 0.0 }, 0.5).is_err());
        assert!(ActivationSpec::new(Family::L1, -1.0).is_err());
        assert!(ActivationSpec::new(
            Family::BlockL1 {
                groups: vec![vec![0, 1], vec![1]]
            },
            0.5
        )
        .is_err());
        assert!(ActivationSpec::new(
            Family::WeightedL1 {
                weights: vec![1.0, 0.0]
            },
            0.5
        )
        .is_err());
        let w = spec(Family::WeightedL1 {
            weights: vec![1.0, 1.0],
        });
        assert!(matches!(
            w.activation(&[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn json_form() {
        let s = spec(Family::Scad { kappa: 3.7 });
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(
            text,
            r#"{"family":"SCAD","lambda":0.5,"params":{"kappa":3.7}}"#
        );
        let back: ActivationSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        let l1: ActivationSpec = serde_json::from_str(r#"{"family":"L1","lambda":0.1}"#).unwrap();
        assert_eq!(l1, ActivationSpec::l1(0.1).unwrap());
        assert!(
            serde_json::from_str::<ActivationSpec>(r#"{"family":"HUBER","lambda":0.1}"#).is_err()
        );
        assert!(
            serde_json::from_str::<ActivationSpec>(r#"{"family":"MCP","lambda":0.1}"#).is_err()
        );
    }
}
