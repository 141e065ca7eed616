use std::sync::Arc;
use sweepout_core::complex::FlatComplex;
use sweepout_core::generators::flat_torus_2d;
use sweepout_core::sweep::{sweep, SweepConfig};

fn scaled(k: &FlatComplex, s: f64) -> FlatComplex {
    let tops = (0..k.top_count()).map(|t| k.top(t).to_vec()).collect();
    let edges = (0..k.edge_count())
        .map(|e| {
            let [u, v] = k.edge(e);
            (u, v, s * k.edge_length(u, v).unwrap())
        })
        .collect();
    FlatComplex::from_edge_lengths(k.dim(), k.vertex_count(), tops, edges).unwrap()
}

fn main() {
    let base = flat_torus_2d(8).unwrap();
    let cfg = SweepConfig::default();
    let out1 = sweep(Arc::new(base.clone()), &cfg).unwrap();
    // determinism: byte-identical certificates across runs
    let out1b = sweep(Arc::new(base.clone()), &cfg).unwrap();
    let j1 = serde_json::to_string(&out1.certificate).unwrap();
    let j1b = serde_json::to_string(&out1b.certificate).unwrap();
    println!("determinism: {}", j1 == j1b);
    for s in [2.0, 1.0 / 3.0] {
        let k2 = scaled(&base, s);
        let cfg2 = SweepConfig { rho: Some(sweepout_core::cells::rho_auto(&k2, 64)), ..cfg.clone() };
        let out2 = sweep(Arc::new(k2), &cfg2).unwrap();
        let n = base.dim() as i32;
        let expect = out1.certificate.width * s.powi(n - 1);
        let rel = (out2.certificate.width - expect).abs() / expect;
        println!(
            "s={s}: width {} vs expected {} rel err {:.3e}",
            out2.certificate.width, expect, rel
        );
    }
}
