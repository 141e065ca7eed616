use std::sync::Arc;
use sweepout_core::cells::{pack_centers, voronoi_cells, PackOptions};
use sweepout_core::complex::{Chain, DerivedComplex, PlMorse};
use sweepout_core::generators::flat_torus_2d;
use sweepout_core::sweep::merge::{merge, MergeSide};

// simple deterministic LCG so the example needs no rand dependency
struct Lcg(u64);
impl Lcg {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        self.0 >> 33
    }
}

fn main() {
    let k = Arc::new(flat_torus_2d(16).unwrap());
    let rho = 1.0 / 8.0 / 2.0f64.sqrt();
    let centers = pack_centers(&k, rho, PackOptions::default()).unwrap();
    let cs = voronoi_cells(&k, &centers, rho, 4.0).unwrap();
    let n_cells = cs.cells.len();
    println!("{} cells", n_cells);
    let root = DerivedComplex::root(k.clone());
    let mut rng = Lcg(12345);
    let mut max_eta: f64 = 0.0;
    let mut fails = 0;
    for run in 0..50 {
        // random nonempty proper cell subset
        let mut side1 = Vec::new();
        while side1.is_empty() || side1.len() == n_cells {
            side1 = (0..n_cells).filter(|_| rng.next() % 2 == 0).collect();
        }
        let in1 = |c: usize| side1.contains(&c);
        let tops1: Vec<usize> = (0..k.top_count()).filter(|&t| in1(cs.cell_of_top[t])).collect();
        let tops2: Vec<usize> = (0..k.top_count()).filter(|&t| !in1(cs.cell_of_top[t])).collect();
        let mut s = Chain::new();
        for f in 0..k.facet_count() {
            let cofs: Vec<usize> = k.facet_cofaces(f).collect();
            if cofs.len() == 2 && (in1(cs.cell_of_top[cofs[0]]) != in1(cs.cell_of_top[cofs[1]])) {
                s.toggle(f);
            }
        }
        let (d1, m1) = root.restrict(&tops1).unwrap();
        let (d2, m2) = root.restrict(&tops2).unwrap();
        let _ = (m1, m2);
        // height sweeps on each side: unrolled principal direction not
        // needed; use a simple generic linear-ish function of vertex index
        let f1 = PlMorse::perturbed(
            d1.complex.clone(),
            (0..d1.complex.vertex_count()).map(|v| (v as f64 * 0.137).sin()).collect(),
        )
        .unwrap();
        let f2 = PlMorse::perturbed(
            d2.complex.clone(),
            (0..d2.complex.vertex_count()).map(|v| (v as f64 * 0.229).cos()).collect(),
        )
        .unwrap();
        let w1 = f1.width_profile().width;
        let w2 = f2.width_profile().width;
        let mut etas = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            match merge(
                &k,
                MergeSide { derived: &d1, values: &f1.values, width: w1 },
                MergeSide { derived: &d2, values: &f2.values, width: w2 },
                &s,
                eps,
            ) {
                Ok(out) => {
                    etas.push(out.stats.eta);
                    if eps == 0.05 {
                        max_eta = max_eta.max(out.stats.eta);
                        let ok = out.stats.width
                            <= w1.max(w2) + 4.0 * out.stats.vol_s * out.stats.eta
                                + 4.0 * out.stats.n_small as f64 * out.stats.delta + 1e-9;
                        if !ok || out.stats.eta > 1.5 {
                            fails += 1;
                            println!("run {run}: eta {:.4} width {:.4} bound {:.4}", out.stats.eta, out.stats.width, out.stats.bound);
                        }
                    }
                }
                Err(e) => {
                    fails += 1;
                    println!("run {run} eps {eps}: MERGE FAILED {e}");
                }
            }
        }
        if etas.len() == 3 {
            if !(etas[0] >= etas[1] - 1e-6 && etas[1] >= etas[2] - 1e-6) {
                println!("run {run}: trend violated: {:?}", etas);
                fails += 1;
            }
        }
    }
    println!("max eta at 0.05: {max_eta:.4}, failures: {fails}");
}
