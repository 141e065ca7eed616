use crate::Command;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;
use sweepout_core::cells::{pack_centers, rho_auto, voronoi_cells, PackOptions};
use sweepout_core::complex::{FlatComplex, PlMorse};
use sweepout_core::constants::build_table;
use sweepout_core::splitter::{build_capacitor, ramp_split, skeletonize};
use sweepout_core::sweep::{bisect_equal_volume, sweep, SweepConfig};
use sweepout_core::Error as CoreError;

pub fn error_kind(err: &anyhow::Error) -> String {
    match err.downcast_ref::<CoreError>() {
        Some(core) => {
            let s = format!("{core:?}");
            s.split(|c: char| c == ' ' || c == '{')
                .next()
                .unwrap_or("Error")
                .to_string()
        }
        None => "Error".into(),
    }
}

/// Serialized sweep function: the refined complex plus its vertex values.
#[derive(Serialize, Deserialize)]
pub struct FunctionFile {
    pub dim: usize,
    pub vertex_count: usize,
    pub simplices: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize, f64)>,
    pub values: Vec<f64>,
}

impl FunctionFile {
    pub fn from_morse(morse: &PlMorse) -> Self {
        let k = &morse.complex;
        let simplices = (0..k.top_count()).map(|t| k.top(t).to_vec()).collect();
        let edges = (0..k.edge_count())
            .map(|e| {
                let [u, v] = k.edge(e);
                (u, v, k.edge_length(u, v).unwrap())
            })
            .collect();
        FunctionFile {
            dim: k.dim(),
            vertex_count: k.vertex_count(),
            simplices,
            edges,
            values: morse.values.clone(),
        }
    }

    pub fn to_morse(&self) -> Result<PlMorse> {
        let complex = FlatComplex::from_edge_lengths(
            self.dim,
            self.vertex_count,
            self.simplices.clone(),
            self.edges.clone(),
        )?;
        Ok(PlMorse::new(Arc::new(complex), self.values.clone())?)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn run(command: Command, quiet: bool) -> Result<()> {
    match command {
        Command::Constants { dim, format } => {
            let table = build_table(dim)?;
            match format.as_str() {
                "json" => println!("{}", serde_json::to_string_pretty(&table)?),
                "text" => print!("{}", table.to_text()),
                other => bail!("unknown format '{other}' (expected json or text)"),
            }
            Ok(())
        }
        Command::Generate { kind, k, subdiv, radius, m, out } => {
            let mut params: Vec<(String, f64)> = Vec::new();
            if let Some(k) = k {
                params.push(("k".into(), k as f64));
            }
            if let Some(s) = subdiv {
                params.push(("subdiv".into(), s as f64));
            }
            if let Some(r) = radius {
                params.push(("radius".into(), r));
            }
            if let Some(m) = m {
                params.push(("m".into(), m as f64));
            }
            let complex = sweepout_core::generators::generate(&kind, &params)?;
            complex.save(&out)?;
            if !quiet {
                println!(
                    "wrote {} ({} vertices, {} simplices, volume {:.6})",
                    out.display(),
                    complex.vertex_count(),
                    complex.top_count(),
                    complex.volume()
                );
            }
            Ok(())
        }
        Command::Cells { input, rho, rho_auto: auto, lambda_max, report } => {
            let complex = FlatComplex::load(&input)?;
            let rho = match (rho, auto) {
                (Some(r), _) => r,
                (None, true) => rho_auto(&complex, 64),
                (None, false) => bail!("pass --rho R or --rho-auto"),
            };
            let centers = pack_centers(&complex, rho, PackOptions::default())?;
            let structure = voronoi_cells(&complex, &centers, rho, lambda_max)?;
            let cert = structure.certificate(&complex);
            if let Some(path) = report {
                write_json(&path, &cert)?;
            }
            if !quiet {
                println!(
                    "cells: {} rho {} lambda {} eqN [{:.6}, {:.6}] vol {:.6}",
                    cert.n_cells, cert.rho, cert.lambda, cert.eq_n_lower, cert.eq_n_upper, cert.volume
                );
            }
            if !cert.eq_n_holds {
                bail!("cell-count sandwich violated");
            }
            Ok(())
        }
        Command::Split { input, rho, lambda_max, report } => {
            let complex = FlatComplex::load(&input)?;
            let rho = rho.unwrap_or_else(|| rho_auto(&complex, 64));
            let centers = pack_centers(&complex, rho, PackOptions::default())?;
            let structure = voronoi_cells(&complex, &centers, rho, lambda_max)?;
            let active: Vec<usize> = (0..structure.cells.len()).collect();
            let region: Vec<usize> = (0..complex.top_count()).collect();
            let capacitor = build_capacitor(&complex, &region)?;
            let ramp = ramp_split(&complex, &region, &capacitor)?;
            let raw = sweepout_core::complex::Chain::from_facets(ramp.chain.iter().copied());
            let split = skeletonize(&complex, &structure, &active, &raw, &ramp.side1)?;
            #[derive(Serialize)]
            struct Report<'a> {
                r: f64,
                capacitor_fractions: [f64; 2],
                ramp_level: f64,
                ramp_chain_volume: f64,
                coarea_average: f64,
                coarea_budget: f64,
                split: &'a sweepout_core::splitter::SplitResult,
            }
            write_json(
                &report,
                &Report {
                    r: capacitor.r,
                    capacitor_fractions: capacitor.achieved_fractions,
                    ramp_level: ramp.level,
                    ramp_chain_volume: ramp.chain_volume,
                    coarea_average: ramp.coarea_average,
                    coarea_budget: ramp.coarea_budget,
                    split: &split,
                },
            )?;
            if !quiet {
                println!(
                    "split: chain volume {:.6}, sides {:.6} / {:.6} ({})",
                    split.chain_volume, split.volume1, split.volume2, split.regime
                );
            }
            Ok(())
        }
        Command::Sweep { input, rho, epsilon, out, cert, profile } => {
            let complex = Arc::new(FlatComplex::load(&input)?);
            let config = SweepConfig { rho, epsilon, ..SweepConfig::default() };
            let outcome = sweep(complex, &config)?;
            write_json(&out, &FunctionFile::from_morse(&outcome.morse))?;
            write_json(&cert, &outcome.certificate)?;
            if let Some(path) = profile {
                let text = profile_csv(&outcome.morse);
                std::fs::write(&path, text)?;
            }
            if !quiet {
                println!(
                    "sweep: width {:.6} <= bound {:.6e} (volume {:.6}, {} cells)",
                    outcome.certificate.width,
                    outcome.certificate.bound,
                    outcome.certificate.volume,
                    outcome.certificate.n_cells
                );
            }
            Ok(())
        }
        Command::Bisect { input, function, report } => {
            let _input_complex = FlatComplex::load(&input)?;
            let text = std::fs::read_to_string(&function)?;
            let file: FunctionFile = serde_json::from_str(&text)?;
            let morse = file.to_morse()?;
            let derived =
                sweepout_core::complex::DerivedComplex::root(morse.complex.clone());
            let bisection = bisect_equal_volume(&morse, &derived)?;
            #[derive(Serialize)]
            struct Report {
                t_star: f64,
                area: f64,
                volume_below: f64,
                volume_above: f64,
                components_below: usize,
                components_above: usize,
                chain_facets: usize,
            }
            write_json(
                &report,
                &Report {
                    t_star: bisection.t_star,
                    area: bisection.area,
                    volume_below: bisection.volume_below,
                    volume_above: bisection.volume_above,
                    components_below: bisection.components_below,
                    components_above: bisection.components_above,
                    chain_facets: bisection.chain.len(),
                },
            )?;
            if !quiet {
                println!(
                    "bisect: t* {:.9}, area {:.6}, sides {:.9} / {:.9}",
                    bisection.t_star, bisection.area, bisection.volume_below, bisection.volume_above
                );
            }
            Ok(())
        }
        Command::Verify { function, cert } => {
            let text = std::fs::read_to_string(&function)?;
            let file: FunctionFile = serde_json::from_str(&text)?;
            let morse = file.to_morse()?;
            let cert_text = std::fs::read_to_string(&cert)?;
            let certificate: sweepout_core::sweep::SweepCertificate =
                serde_json::from_str(&cert_text)?;
            let profile = morse.width_profile();
            let tol = 1e-6;
            if (profile.width - certificate.width).abs()
                > tol * certificate.width.abs().max(1.0)
            {
                return Err(CoreError::WidthMismatch {
                    expected: certificate.width,
                    actual: profile.width,
                }
                .into());
            }
            let table = build_table(certificate.dim)?;
            let vol = morse.complex.volume();
            let nf = certificate.dim as f64;
            let bound = table.c_width.value * vol.powf((nf - 1.0) / nf);
            if (bound - certificate.bound).abs() > tol * bound {
                bail!("certificate bound mismatch: recomputed {bound}, recorded {}", certificate.bound);
            }
            if profile.width > bound * (1.0 + tol) {
                return Err(CoreError::GlobalBudgetExceeded {
                    achieved: profile.width,
                    budget: bound,
                }
                .into());
            }
            if !quiet_verify() {
                println!(
                    "verify: ok (width {:.9} <= {:.6e})",
                    profile.width, bound
                );
            }
            Ok(())
        }
    }
}

fn quiet_verify() -> bool {
    false
}

/// 512 level samples plus the exact per-interval maxima.
pub fn profile_csv(morse: &PlMorse) -> String {
    let profile = morse.width_profile();
    let lo = morse.min_value();
    let hi = morse.max_value();
    let mut out = String::from("t,volume,kind\n");
    for i in 0..512 {
        let t = lo + (hi - lo) * (i as f64 + 0.5) / 512.0;
        out.push_str(&format!("{:.17e},{:.17e},sample\n", t, morse.level_volume(t)));
    }
    for i in 0..profile.polys.len() {
        let span = profile.breakpoints[i + 1] - profile.breakpoints[i];
        let (u, v) = profile.polys[i].max_on(span);
        out.push_str(&format!(
            "{:.17e},{:.17e},interval-max\n",
            profile.breakpoints[i] + u,
            v
        ));
    }
    out
}
