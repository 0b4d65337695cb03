use serde::{Deserialize, Serialize};

use crate::costs::{fit_lp_params, ActivationSpec, Family};
use crate::error::{Error, Result};

/// One representative spec per catalog family, all at the same `λ`.
///
/// Shape parameters: ℓp fits at `p = 0.5` and `p = 1.5`, SCAD `κ = 3.7`, transformed ℓ1
/// `β = 1`, Huber `ε = 1`, log barrier `γ = 100`, unit weights, and a singleton group for the
/// block family (which then coincides with the soft threshold).
pub fn activation_catalog(lambda: f64) -> Result<Vec<ActivationSpec>> {
    let families = vec![
        Family::L1,
        Family::L0,
        fit_lp_params(0.5)?.family(),
        fit_lp_params(1.5)?.family(),
        Family::Scad { kappa: 3.7 },
        Family::TransformedL1 { beta: 1.0 },
        Family::Huber { epsilon: 1.0 },
        Family::Asib,
        Family::BlockL1 {
            groups: vec![vec![0]],
        },
        Family::LogBarrier { gamma: 100.0 },
        Family::WeightedL1 { weights: vec![1.0] },
        Family::WeightedL2 { weights: vec![1.0] },
    ];
    families
        .into_iter()
        .map(|f| ActivationSpec::new(f, lambda))
        .collect()
}

/// Catalog family by name (case-insensitive), with the catalog's shape parameters.
pub fn catalog_family(name: &str) -> Result<Family> {
    let k = Family::NAMES
        .iter()
        .position(|n| n.eq_ignore_ascii_case(name))
        .ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown cost family `{name}`; expected one of {}",
                Family::NAMES.join(", ")
            ))
        })?;
    Ok(activation_catalog(1.0)?.swap_remove(k).family().clone())
}

/// `T_λ(u)` and `C(T_λ(u))` for every catalog family on an evenly spaced `u` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationTable {
    pub lambda: f64,
    pub u: Vec<f64>,
    /// Catalog order.
    pub columns: Vec<ActivationColumn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivationColumn {
    pub family: String,
    pub activation: Vec<f64>,
    /// Unscaled cost of the activation value (no `λ` factor).
    pub cost: Vec<f64>,
}

pub fn activation_table(lambda: f64, u_max: f64, points: usize) -> Result<ActivationTable> {
    let u: Vec<f64> = (0..points)
        .map(|k| -u_max + 2.0 * u_max * k as f64 / (points.max(2) - 1) as f64)
        .collect();
    let mut columns = Vec::new();
    for spec in activation_catalog(lambda)? {
        let activation = u
            .iter()
            .map(|&x| spec.activation(&[x]).map(|a| a[0]))
            .collect::<Result<Vec<f64>>>()?;
        let cost = activation
            .iter()
            .map(|&a| spec.cost_value(&[a]))
            .collect::<Result<Vec<f64>>>()?;
        columns.push(ActivationColumn {
            family: spec.family().name().to_string(),
            activation,
            cost,
        });
    }
    Ok(ActivationTable { lambda, u, columns })
}
