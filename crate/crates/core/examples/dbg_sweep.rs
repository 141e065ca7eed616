use std::sync::Arc;
use std::time::Instant;
use sweepout_core::generators::{flat_torus_2d, flat_torus_3d, icosphere};
use sweepout_core::sweep::{bisect_equal_volume, sweep, SweepConfig};
use sweepout_core::complex::DerivedComplex;

fn run(name: &str, k: sweepout_core::complex::FlatComplex) {
    let k = Arc::new(k);
    let vol = k.volume();
    let t0 = Instant::now();
    let config = SweepConfig::default();
    match sweep(k.clone(), &config) {
        Ok(out) => {
            let n = k.dim() as f64;
            let sanity = 20.0 * vol.powf((n - 1.0) / n);
            println!(
                "{name}: width {:.4} (sanity {:.2}) cells {} lambda {:.3} tops {} [{:?}]",
                out.certificate.width,
                sanity,
                out.certificate.n_cells,
                out.certificate.lambda,
                out.morse.complex.top_count(),
                t0.elapsed()
            );
            // distinctness
            let mut v = out.morse.values.clone();
            v.sort_by(f64::total_cmp);
            assert!(v.windows(2).all(|w| w[0] < w[1]), "values not distinct");
            // bisect
            let t1 = Instant::now();
            let derived = DerivedComplex {
                complex: out.morse.complex.clone(),
                hosts: out.derived.hosts.clone(),
                source_top: out.derived.source_top.clone(),
            };
            match bisect_equal_volume(&out.morse, &derived) {
                Ok(b) => println!(
                    "  bisect: t* {:.6} area {:.4} sides {:.8}/{:.8} comps {}/{} [{:?}]",
                    b.t_star, b.area, b.volume_below, b.volume_above,
                    b.components_below, b.components_above, t1.elapsed()
                ),
                Err(e) => println!("  BISECT FAILED: {e}"),
            }
        }
        Err(e) => println!("{name}: SWEEP FAILED: {e}"),
    }
}

fn main() {
    run("torus16", flat_torus_2d(16).unwrap());
    run("icosphere(3,1)", icosphere(3, 1.0).unwrap().0);
    run("torus3d(4)", flat_torus_3d(4).unwrap());
}
