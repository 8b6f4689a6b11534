//! Qubit, gate and depth counts for the multiplication circuit.
//!
//! `W3` is the only stage that is not already made of one- and two-qubit
//! gates. It is expanded here into `X` wraps, two CNOTs and a chain of
//! Toffolis that borrows idle register qubits as dirty ancillas, so every
//! number in the report comes from an explicit gate list. Toffoli and
//! controlled-SWAP gates count as one elementary gate each.
//!
//! Depths are ASAP layer counts. The total is the sum of the stage depths,
//! which bounds the depth of the whole circuit from above.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::conjugator::{q_controlled_gates, q_gates, QOp};
use crate::error::{Error, Result};
use crate::multiplier::{w0_gates, w1_gates, w2_gates};
use crate::registers::{RegisterLayout, Subsystem};
use crate::statevector::{Control, Gate, GateKind};

/// Toffoli gate `ccx(a, b; target)`.
pub fn toffoli(a: usize, b: usize, target: usize) -> Gate {
    Gate::x(target).controlled(a, true).controlled(b, true)
}

/// `X` on `target` controlled on all of `controls` being 1, as Toffolis.
///
/// For `m >= 3` controls this needs `m - 2` dirty ancillas, which may hold
/// arbitrary data and are restored, and uses `4(m - 2)` Toffolis.
pub fn decompose_mcx(controls: &[usize], target: usize, dirty: &[usize]) -> Result<Vec<Gate>> {
    let m = controls.len();
    match m {
        0 => return Ok(vec![Gate::x(target)]),
        1 => return Ok(vec![Gate::cnot(controls[0], target)]),
        2 => return Ok(vec![toffoli(controls[0], controls[1], target)]),
        _ => {}
    }
    if dirty.len() < m - 2 {
        return Err(Error::Layout(format!(
            "{m} controls need {} dirty ancillas, only {} available",
            m - 2,
            dirty.len()
        )));
    }
    let (c, a) = (controls, &dirty[..m - 2]);
    // the ladder from the target down to the first ancilla
    let ladder = |skip_top: bool| -> Vec<Gate> {
        let mut v = Vec::with_capacity(m - 2);
        if !skip_top {
            v.push(toffoli(c[m - 1], a[m - 3], target));
        }
        for i in (3..m).rev() {
            v.push(toffoli(c[i - 1], a[i - 3], a[i - 2]));
        }
        v
    };
    let core = toffoli(c[0], c[1], a[0]);
    let mut gates = Vec::with_capacity(4 * (m - 2));
    for skip_top in [false, true] {
        let down = ladder(skip_top);
        gates.extend(down.iter().cloned());
        gates.push(core.clone());
        gates.extend(down.into_iter().rev());
    }
    Ok(gates)
}

/// `W3` expanded into elementary gates.
pub fn w3_elementary(layout: &RegisterLayout) -> Result<Vec<Gate>> {
    let mut controls = Vec::with_capacity(2 * layout.n() + 2);
    for s in [Subsystem::C1, Subsystem::R2, Subsystem::M2, Subsystem::K2] {
        controls.extend(layout.range(s)?);
    }
    let mut dirty = Vec::with_capacity(2 * layout.n() + 2);
    for s in [Subsystem::M1, Subsystem::R1, Subsystem::C2, Subsystem::K1] {
        dirty.extend(layout.range(s)?);
    }
    let b = layout.qubit(Subsystem::B)?;
    let bt = layout.qubit(Subsystem::BT)?;
    let flips = Gate::new(GateKind::X, controls.clone());
    let mut gates = vec![flips.clone(), Gate::cnot(b, bt)];
    gates.extend(decompose_mcx(&controls, b, &dirty)?);
    gates.push(Gate::cnot(b, bt));
    gates.push(flips);
    Ok(gates)
}

/// Number of elementary gates in `g`.
pub fn elementary_count(g: &Gate) -> usize {
    if g.controls.is_empty() && g.kind != GateKind::Swap {
        g.targets.len()
    } else {
        1
    }
}

fn label(g: &Gate) -> String {
    let base = match g.kind {
        GateKind::X => "x",
        GateKind::Z => "z",
        GateKind::H => "h",
        GateKind::XZ => "xz",
        GateKind::Swap => "swap",
    };
    match g.controls.len() {
        0 => base.to_string(),
        1 => format!("c{base}"),
        2 => format!("cc{base}"),
        k => format!("c{k}-{base}"),
    }
}

fn involved(g: &Gate) -> impl Iterator<Item = usize> + '_ {
    g.targets.iter().copied().chain(g.controls.iter().map(|c: &Control| c.qubit))
}

/// ASAP layer count of a gate list.
pub fn schedule_depth(gates: &[Gate]) -> usize {
    let mut busy: Vec<usize> = Vec::new();
    let mut depth = 0;
    for g in gates {
        let top = involved(g).max().unwrap_or(0);
        if busy.len() <= top {
            busy.resize(top + 1, 0);
        }
        let layer = involved(g).map(|q| busy[q]).max().unwrap_or(0) + 1;
        for q in involved(g) {
            busy[q] = layer;
        }
        depth = depth.max(layer);
    }
    depth
}

/// Gate and depth count of one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageCost {
    pub name: String,
    pub gates: usize,
    pub depth: usize,
    pub by_kind: BTreeMap<String, usize>,
}

impl StageCost {
    pub fn from_gates(name: &str, gates: &[Gate]) -> Self {
        let mut by_kind = BTreeMap::new();
        for g in gates {
            *by_kind.entry(label(g)).or_insert(0) += elementary_count(g);
        }
        Self {
            name: name.to_string(),
            gates: gates.iter().map(elementary_count).sum(),
            depth: schedule_depth(gates),
            by_kind,
        }
    }
}

/// Cost of one input manipulation, bare and flag-controlled.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManipulationCost {
    pub name: String,
    pub uncontrolled: StageCost,
    pub controlled: StageCost,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub n: usize,
    pub qubits: usize,
    pub qubits_with_controls: usize,
    /// `W0`, `W1`, `W2`, `W3` and the conditional measurement, in order.
    pub stages: Vec<StageCost>,
    pub manipulations: Vec<ManipulationCost>,
    /// Controls on the `W3` gate, `2(n + 1)`.
    pub w3_controls: usize,
    pub w3_toffolis: usize,
    pub total_gates: usize,
    /// Sum of the stage depths.
    pub depth_bound: usize,
}

/// Closed form of [`ResourceReport::depth_bound`]: `8n + 7`.
pub fn depth_bound_formula(n: usize) -> usize {
    8 * n + 7
}

/// Resource counts for `n`-qubit index registers.
pub fn resource_report(n: usize) -> Result<ResourceReport> {
    let layout = RegisterLayout::new(n, false)?;
    let flagged = RegisterLayout::new(n, true)?;
    let w3 = w3_elementary(&layout)?;
    let measure = StageCost {
        name: "W4".into(),
        gates: 1,
        depth: 1,
        by_kind: BTreeMap::from([("measure".to_string(), 1)]),
    };
    let stages = vec![
        StageCost::from_gates("W0", &w0_gates(&layout)?),
        StageCost::from_gates("W1", &w1_gates(&layout)?),
        StageCost::from_gates("W2", &w2_gates(&layout)?),
        StageCost::from_gates("W3", &w3),
        measure,
    ];
    let manipulations = [QOp::Q1, QOp::Q2, QOp::Q3]
        .into_iter()
        .map(|op| {
            let name = format!("{op:?}");
            Ok(ManipulationCost {
                uncontrolled: StageCost::from_gates(&name, &q_gates(op, &flagged)?),
                controlled: StageCost::from_gates(&name, &q_controlled_gates(op, &flagged)?),
                name,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k = 2 * (n + 1);
    Ok(ResourceReport {
        n,
        qubits: layout.total_qubits(),
        qubits_with_controls: flagged.total_qubits(),
        w3_controls: k,
        w3_toffolis: w3.iter().filter(|g| g.controls.len() == 2).count(),
        total_gates: stages.iter().map(|s| s.gates).sum(),
        depth_bound: stages.iter().map(|s| s.depth).sum(),
        stages,
        manipulations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplier::w3_gates;
    use crate::registers::layout_for;
    use crate::statevector::StateVector;
    use crate::testutil::{random_state, rng};

    fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn mcx_decomposition_matches_engine() {
        let mut r = rng(41);
        for m in 1..=5 {
            let q = 2 * m;
            let controls: Vec<usize> = (0..m).collect();
            let target = m;
            let dirty: Vec<usize> = (m + 1..q).collect();
            let gates = decompose_mcx(&controls, target, &dirty).unwrap();
            if m >= 3 {
                assert_eq!(gates.len(), 4 * (m - 2));
            }
            let mcx = Gate::multi_controlled_x(
                vec![target],
                controls.iter().map(|&qubit| Control { qubit, polarity: true }).collect(),
            );
            for _ in 0..3 {
                let s = random_state(&mut r, q);
                let a = s.clone().apply_all(&gates).unwrap();
                let b = s.apply_gate(&mcx).unwrap();
                assert!(max_diff(&a, &b) < 1e-13, "m = {m}");
            }
        }
    }

    #[test]
    fn mcx_needs_ancillas() {
        assert!(matches!(decompose_mcx(&[0, 1, 2, 3], 4, &[5]), Err(Error::Layout(_))));
    }

    #[test]
    fn w3_expansion_matches_engine() {
        let mut r = rng(42);
        for n in 1..=2 {
            let layout = layout_for(n, false).unwrap();
            let s = random_state(&mut r, layout.total_qubits());
            let a = s.clone().apply_all(&w3_elementary(&layout).unwrap()).unwrap();
            let b = s.apply_all(&w3_gates(&layout).unwrap()).unwrap();
            assert!(max_diff(&a, &b) < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule_depth(&[]), 0);
        assert_eq!(schedule_depth(&[Gate::h(0), Gate::h(1)]), 1);
        assert_eq!(schedule_depth(&[Gate::h(0), Gate::cnot(0, 1), Gate::x(2)]), 2);
        assert_eq!(schedule_depth(&[Gate::new(GateKind::H, vec![0, 1, 2])]), 1);
    }

    #[test]
    fn small_reports() {
        let r = resource_report(1).unwrap();
        assert_eq!(r.qubits, 10);
        assert_eq!(r.qubits_with_controls, 13);
        assert_eq!(r.stages[0].gates, 1);
        assert_eq!(r.stages[0].by_kind["cx"], 1);
        assert_eq!(resource_report(3).unwrap().qubits, 18);
        assert!(resource_report(0).is_err());
    }

    #[test]
    fn stage_counts_follow_formulas() {
        for n in 1..=6 {
            let r = resource_report(n).unwrap();
            let k = 2 * (n + 1);
            let get = |name: &str| r.stages.iter().find(|s| s.name == name).unwrap();
            assert_eq!((get("W0").gates, get("W0").depth), (n, 1));
            assert_eq!((get("W1").gates, get("W1").depth), (n, 1));
            assert_eq!((get("W2").gates, get("W2").depth), (3, 2));
            assert_eq!(r.w3_controls, k);
            assert_eq!(r.w3_toffolis, 4 * (k - 2));
            assert_eq!(get("W3").gates, 2 * k + 2 + 4 * (k - 2));
            assert_eq!(get("W3").depth, 4 * (k - 2) + 2);
            assert_eq!(r.depth_bound, depth_bound_formula(n));
            for m in &r.manipulations {
                let expect = if m.name == "Q3" { 2 * n + 1 } else { n + 1 };
                assert_eq!(m.uncontrolled.gates, expect);
                assert_eq!(m.uncontrolled.depth, 1);
                assert_eq!(m.controlled.gates, expect);
                assert_eq!(m.controlled.depth, expect);
            }
        }
    }

    #[test]
    fn depth_grows_linearly() {
        let d: Vec<usize> = (1..=6).map(|n| resource_report(n).unwrap().depth_bound).collect();
        let step = d[1] - d[0];
        assert!(d.windows(2).all(|w| w[1] - w[0] == step));
        assert!(d[3] as f64 / d[1] as f64 <= 2.5);
    }
}
