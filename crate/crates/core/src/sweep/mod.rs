//! The certified sweep construction: single-cell parallel sweeps, the
//! recursion over the cell structure with merges across the splitting
//! chains, and the equal-volume bisection of the result.

pub mod merge;
pub mod unroll;

use crate::cells::{pack_centers, rho_auto, voronoi_cells, CellStructure, PackOptions};
use crate::complex::{
    cut_complex_along, Chain, DerivedComplex, DistanceOptions, FlatComplex, PlMorse,
};
use crate::constants::build_table;
use crate::splitter::{build_capacitor, ramp_split, skeletonize, Capacitor, RampSplit, SplitResult};
use crate::{Error, Result, CERT_REL_TOL};
use merge::{merge, MergeOutcome, MergeSide, MergeStats};
use serde::Serialize;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// packing radius; None picks rho = (vol/(omega_n n_target))^(1/n)
    pub rho: Option<f64>,
    pub epsilon: f64,
    pub lambda_max: f64,
    pub n_target: usize,
    pub center_cap: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rho: None,
            epsilon: 0.05,
            lambda_max: 4.0,
            n_target: 64,
            center_cap: 100_000,
        }
    }
}

/// One node of the recursion trace.
#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct TraceNode {
    pub cells: Vec<usize>,
    pub volume: f64,
    pub width: f64,
    pub split_chain_volume: Option<f64>,
    pub split_regime: Option<String>,
    pub capacitor_fractions: Option<[f64; 2]>,
    pub merge: Option<MergeStats>,
    pub children: Vec<TraceNode>,
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct SweepCertificate {
    pub dim: usize,
    pub volume: f64,
    pub width: f64,
    /// C_n vol^((n-1)/n)
    pub bound: f64,
    pub slack: f64,
    pub constant_c_n: f64,
    pub epsilon: f64,
    pub rho: f64,
    pub lambda: f64,
    pub n_cells: usize,
    pub trace: TraceNode,
}

pub struct SweepOutcome {
    pub derived: DerivedComplex,
    pub morse: PlMorse,
    pub certificate: SweepCertificate,
    pub structure: CellStructure,
}

/// Sweep a single quasi-convex cell by parallel hyperplanes: heights along
/// the direction of largest spread of the unrolled cell, falling back to
/// graph distance from a peripheral vertex. The width is certified against
/// 6^(n-1) omega_{n-1} omega_n^(-(n-1)/n) lambda^(2(n-1)) vol^((n-1)/n).
pub fn sweep_single_cell(
    derived: &DerivedComplex,
    lambda: f64,
) -> Result<(PlMorse, f64)> {
    let k = &derived.complex;
    let n = k.dim();
    let table = build_table(n)?;
    let budget = table.single_cell.value
        * lambda.powi(2 * (n as i32 - 1))
        * k.volume().powf((n as f64 - 1.0) / n as f64)
        * (1.0 + CERT_REL_TOL);
    let mut best: Option<(PlMorse, f64)> = None;
    let mut raws: Vec<Vec<f64>> = Vec::new();
    if let Some(coords) = unroll::unroll(k) {
        raws.push(unroll::principal_heights(&coords));
    }
    {
        // peripheral vertex: farthest from vertex 0, then sweep by distance
        let from0 = k.vertex_distances(&[0], DistanceOptions::default());
        let peripheral = (0..k.vertex_count())
            .filter(|&v| from0.dist[v].is_finite())
            .max_by(|&a, &b| from0.dist[a].total_cmp(&from0.dist[b]).then(b.cmp(&a)))
            .unwrap_or(0);
        let field = k.vertex_distances(&[peripheral], DistanceOptions::default());
        raws.push(field.dist.clone());
    }
    for raw in raws {
        if raw.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let morse = PlMorse::perturbed(k.clone(), raw)?;
        let width = morse.width_profile().width;
        if width <= budget {
            return Ok((morse, width));
        }
        if best.as_ref().map_or(true, |(_, w)| width < *w) {
            best = Some((morse, width));
        }
    }
    let achieved = best.map_or(f64::INFINITY, |(_, w)| w);
    Err(Error::SingleCellBudgetExceeded { achieved, budget })
}

struct NodeOutcome {
    derived: DerivedComplex,
    morse: PlMorse,
    width: f64,
    trace: TraceNode,
}

struct SweepContext<'a> {
    root: &'a FlatComplex,
    root_derived: &'a DerivedComplex,
    structure: &'a CellStructure,
    config: &'a SweepConfig,
}

/// Run the full construction on a complex.
pub fn sweep(complex: Arc<FlatComplex>, config: &SweepConfig) -> Result<SweepOutcome> {
    let n = complex.dim();
    let table = build_table(n)?;
    let rho = config.rho.unwrap_or_else(|| rho_auto(&complex, config.n_target));
    let centers = match pack_centers(&complex, rho, PackOptions { center_cap: config.center_cap }) {
        Ok(c) => c,
        Err(Error::RhoTooLarge { .. }) => vec![0],
        Err(e) => return Err(e),
    };
    let structure = voronoi_cells(&complex, &centers, rho, config.lambda_max)?;
    let root_derived = DerivedComplex::root(complex.clone());
    let ctx = SweepContext {
        root: &complex,
        root_derived: &root_derived,
        structure: &structure,
        config,
    };
    let active: Vec<usize> = (0..structure.cells.len()).collect();
    let node = sweep_node(&ctx, &active)?;
    let vol = complex.volume();
    let bound = table.c_width.value * vol.powf((n as f64 - 1.0) / n as f64);
    if node.width > bound * (1.0 + CERT_REL_TOL) {
        return Err(Error::GlobalBudgetExceeded { achieved: node.width, budget: bound });
    }
    let certificate = SweepCertificate {
        dim: n,
        volume: vol,
        width: node.width,
        bound,
        slack: bound - node.width,
        constant_c_n: table.c_width.value,
        epsilon: config.epsilon,
        rho,
        lambda: structure.lambda,
        n_cells: structure.cells.len(),
        trace: node.trace,
    };
    Ok(SweepOutcome { derived: node.derived, morse: node.morse, certificate, structure })
}

fn sweep_node(ctx: &SweepContext, active: &[usize]) -> Result<NodeOutcome> {
    let volume: f64 = active.iter().map(|&c| ctx.structure.cells[c].volume).sum();
    if active.len() == 1 {
        let cell = &ctx.structure.cells[active[0]];
        let (derived, _) = ctx.root_derived.restrict(&cell.tops)?;
        let (morse, width) = sweep_single_cell(&derived, ctx.structure.lambda)?;
        return Ok(NodeOutcome {
            derived,
            morse,
            width,
            trace: TraceNode {
                cells: active.to_vec(),
                volume,
                width,
                split_chain_volume: None,
                split_regime: None,
                capacitor_fractions: None,
                merge: None,
                children: Vec::new(),
            },
        });
    }
    // splitter chain: capacitor -> ramp -> skeletonize; capacitor or
    // coarea failures fall through to the trivial split inside skeletonize
    let region: Vec<usize> = {
        let mut r: Vec<usize> = active
            .iter()
            .flat_map(|&c| ctx.structure.cells[c].tops.iter().copied())
            .collect();
        r.sort_unstable();
        r
    };
    let (capacitor, ramp): (Option<Capacitor>, Option<RampSplit>) =
        match build_capacitor(ctx.root, &region) {
            Ok(cap) => match ramp_split(ctx.root, &region, &cap) {
                Ok(r) => (Some(cap), Some(r)),
                Err(_) => (Some(cap), None),
            },
            Err(_) => (None, None),
        };
    let raw_chain = match &ramp {
        Some(r) => Chain::from_facets(r.chain.iter().copied()),
        None => Chain::new(),
    };
    let side1: Vec<usize> = ramp.as_ref().map(|r| r.side1.clone()).unwrap_or_default();
    let split: SplitResult =
        skeletonize(ctx.root, ctx.structure, active, &raw_chain, &side1)?;
    let child1 = sweep_node(ctx, &split.cells1)?;
    let child2 = sweep_node(ctx, &split.cells2)?;
    let s_chain = Chain::from_facets(split.chain.iter().copied());
    // merge with automatic epsilon halving on collision or budget failure
    let mut epsilon = ctx.config.epsilon;
    let mut outcome: Option<MergeOutcome> = None;
    let mut last_err: Option<Error> = None;
    for _ in 0..3 {
        match merge(
            ctx.root,
            MergeSide {
                derived: &child1.derived,
                values: &child1.morse.values,
                width: child1.width,
            },
            MergeSide {
                derived: &child2.derived,
                values: &child2.morse.values,
                width: child2.width,
            },
            &s_chain,
            epsilon,
        ) {
            Ok(m) => {
                outcome = Some(m);
                break;
            }
            Err(e @ (Error::EpsilonTooLarge { .. } | Error::MergeBudgetFailure { .. })) => {
                last_err = Some(e);
                epsilon *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    let Some(m) = outcome else {
        return Err(last_err.unwrap_or(Error::EpsilonTooLarge { epsilon }));
    };
    let width = m.stats.width;
    let trace = TraceNode {
        cells: active.to_vec(),
        volume,
        width,
        split_chain_volume: Some(split.chain_volume),
        split_regime: Some(split.regime.clone()),
        capacitor_fractions: capacitor.as_ref().map(|c| c.achieved_fractions),
        merge: Some(m.stats.clone()),
        children: vec![child1.trace, child2.trace],
    };
    Ok(NodeOutcome { derived: m.derived, morse: m.morse, width, trace })
}

#[derive(Debug)]
pub struct Bisection {
    pub t_star: f64,
    /// refined complex cut along the level
    pub cut: DerivedComplex,
    /// level chain in the cut complex
    pub chain: Chain,
    pub area: f64,
    pub volume_below: f64,
    pub volume_above: f64,
    pub components_below: usize,
    pub components_above: usize,
}

/// Find the level t* splitting the volume in half, return the level chain
/// (snapped regular) with its area, the two side volumes and their
/// connected-component counts. The input complex must be closed.
pub fn bisect_equal_volume(morse: &PlMorse, derived: &DerivedComplex) -> Result<Bisection> {
    let k = &morse.complex;
    if !k.boundary_facets().is_empty() {
        return Err(Error::InvalidChain {
            message: "equal-volume bisection requires a closed complex".into(),
        });
    }
    let vol = k.volume();
    let target = 0.5 * vol;
    let mut lo = morse.min_value();
    let mut hi = morse.max_value();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if morse.sublevel_volume(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (t_star, _) = morse.snap_regular(0.5 * (lo + hi));
    let cut = cut_complex_along(derived, &morse.values, t_star, 0.0)?;
    let area = cut.section.volume(&cut.derived.complex);
    let volume_below = cut.derived.complex.volume_of(&cut.below_tops);
    let volume_above = cut.derived.complex.volume_of(&cut.above_tops);
    let components_below = component_count(&cut.derived.complex, &cut.below_tops);
    let components_above = component_count(&cut.derived.complex, &cut.above_tops);
    Ok(Bisection {
        t_star,
        chain: cut.section.clone(),
        cut: cut.derived,
        area,
        volume_below,
        volume_above,
        components_below,
        components_above,
    })
}

fn component_count(complex: &FlatComplex, tops: &[usize]) -> usize {
    let member: std::collections::BTreeSet<usize> = tops.iter().copied().collect();
    let mut seen: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
    let mut count = 0;
    for &start in tops {
        if seen.contains(&start) {
            continue;
        }
        count += 1;
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(t) = stack.pop() {
            for (nb, _) in complex.dual_adjacency(t) {
                if member.contains(&nb) && !seen.contains(&nb) {
                    seen.insert(nb);
                    stack.push(nb);
                }
            }
        }
    }
    count
}
