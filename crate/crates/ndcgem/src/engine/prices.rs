use crate::master::{FeasibilityCut, MarketMode, MasterModel, MasterSolution};
use crate::model::Instance;
use crate::solver::LpSolution;

use super::EngineError;

/// Market prices read from the fixed-commitment LP.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult {
    /// Locational marginal electricity price `[bus][hour]`, $/MWh.
    pub lmep: Vec<Vec<f64>>,
    /// System energy component `[hour]`.
    pub system_energy: Vec<f64>,
    /// Line shadow prices `[line][hour]`, same scaling as `lmep`.
    pub line_duals: Vec<Vec<f64>>,
    /// Gas price `[hour]`, $/kcf, uniform over nodes.
    pub gas_price: Vec<f64>,
    /// Gas capacity price `[unit][hour]`, $/kcf; `None` for the baseline.
    pub capacity_price: Option<Vec<Vec<f64>>>,
    /// Nonnegative cut multipliers in cut order.
    pub cut_duals: Vec<f64>,
}

/// Prices from the DA-scenario rows of a fixed-commitment LP. Balance and
/// line duals are divided by the DA weight so they read in $/MWh and $/kcf.
pub fn extract_prices(
    mm: &MasterModel,
    lp: &LpSolution,
    inst: &Instance,
    cuts: &[FeasibilityCut],
) -> Result<PriceResult, EngineError> {
    let sys = &inst.sys;
    let nt = sys.horizon;
    if lp.row_duals.len() != mm.model.num_rows() {
        return Err(EngineError::MissingDuals(format!(
            "{} duals for {} rows",
            lp.row_duals.len(),
            mm.model.num_rows()
        )));
    }
    if cuts.len() != mm.cut_rows.len() {
        return Err(EngineError::MissingDuals(format!(
            "{} cuts but {} cut rows",
            cuts.len(),
            mm.cut_rows.len()
        )));
    }
    let rho = mm.weights[0];
    let da = &mm.scenarios[0];
    let dual = |r: crate::solver::RowId| lp.row_duals[r.0];

    let system_energy: Vec<f64> = da.balance.iter().map(|&r| dual(r) / rho).collect();
    let line_duals: Vec<Vec<f64>> = da
        .lines
        .iter()
        .map(|row| row.iter().map(|r| r.map_or(0.0, |r| dual(r) / rho)).collect())
        .collect();
    let lmep: Vec<Vec<f64>> = (0..sys.buses.len())
        .map(|m| {
            (0..nt)
                .map(|t| {
                    system_energy[t]
                        + (0..sys.lines.len())
                            .map(|q| inst.ptdf.gamma[q][m] * line_duals[q][t])
                            .sum::<f64>()
                })
                .collect()
        })
        .collect();
    let gas_price = mm.gas.balance[0].iter().map(|&r| dual(r) / rho).collect();

    let cut_duals: Vec<f64> = mm.cut_rows.iter().map(|&r| (-dual(r)).max(0.0)).collect();
    let capacity_price = (mm.mode == MarketMode::Coordinated).then(|| {
        let mut cap = vec![vec![0.0; nt]; sys.units.len()];
        for (cut, &beta) in cuts.iter().zip(&cut_duals) {
            if beta == 0.0 {
                continue;
            }
            for term in &cut.booking {
                cap[term.index][cut.hour] += term.coef * beta;
            }
        }
        cap
    });
    Ok(PriceResult {
        lmep,
        system_energy,
        line_duals,
        gas_price,
        capacity_price,
        cut_duals,
    })
}

/// Value of delivered gas to each GFU, `[unit][hour]` in $/kcf: the LMEP at
/// its bus over the heat rate of the segment it runs on. Zero for offline
/// hours and conventional units; online hours are floored at `floor` so
/// delivery is always preferred to shortfall.
pub fn marginal_gas_value(
    inst: &Instance,
    sol: &MasterSolution,
    prices: &PriceResult,
    floor: f64,
) -> Vec<Vec<f64>> {
    let sys = &inst.sys;
    sys.units
        .iter()
        .enumerate()
        .map(|(g, u)| {
            (0..sys.horizon)
                .map(|t| {
                    if !u.is_gfu || !sol.on[g][t] {
                        return 0.0;
                    }
                    let eps = u.curve().right_slope(sol.dispatch[0].p[g][t]);
                    (prices.lmep[sys.index.unit_bus[g]][t] / eps).max(floor)
                })
                .collect()
        })
        .collect()
}
