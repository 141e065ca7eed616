use sweepout_core::cells::{pack_centers, voronoi_cells, PackOptions};
use sweepout_core::generators::flat_torus_2d;
use sweepout_core::splitter::{build_capacitor, capacitor_separation, ramp_split};

fn main() {
    for k in [8usize, 16, 32] {
        let complex = flat_torus_2d(k).unwrap();
        let rho = 1.0 / ((8 * k) as f64).sqrt();
        let centers = pack_centers(&complex, rho, PackOptions::default()).unwrap();
        match voronoi_cells(&complex, &centers, rho, 4.0) {
            Ok(cs) => {
                let cert = cs.certificate(&complex);
                println!(
                    "k={k}: rho {:.5} centers {} lambda {:.6} eqN [{:.4}, {:.4}] holds {}",
                    rho, centers.len(), cs.lambda, cert.eq_n_lower, cert.eq_n_upper, cert.eq_n_holds
                );
            }
            Err(e) => println!("k={k}: FAILED {e}"),
        }
    }
    // criterion 4/5: capacitor + ramp on torus16
    let complex = flat_torus_2d(16).unwrap();
    let region: Vec<usize> = (0..complex.top_count()).collect();
    let cap = build_capacitor(&complex, &region).unwrap();
    let sep = capacitor_separation(&complex, &cap);
    println!(
        "capacitor: r {:.5} fractions [{:.5}, {:.5}] separation {:.5} (r-h = {:.5}) centers {:?}",
        cap.r, cap.achieved_fractions[0], cap.achieved_fractions[1],
        sep, cap.r - cap.slack, cap.ball_centers
    );
    let ramp = ramp_split(&complex, &region, &cap).unwrap();
    println!(
        "ramp: level {:.4} chain vol {:.4} (budget {:.2}) coarea avg {:.4} <= {:.4}",
        ramp.level, ramp.chain_volume, ramp.chain_budget.required,
        ramp.coarea_average, ramp.coarea_budget
    );
}
