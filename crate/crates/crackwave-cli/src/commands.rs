use std::collections::BTreeMap;
use std::path::Path;

use crackwave::asymptotics::{class_exponent, correction_order, rho_constant_3d, AsymptoticConstants};
use crackwave::boundary_op::{assemble_q, Basis, SymmetryClass};
use crackwave::context::ThresholdContext;
use crackwave::dispersion::{branch_eigenvalues, BranchOptions};
use crackwave::dtn::dtn_symbol;
use crackwave::spectral::{fit_power_law, fixed_exponent_prefactor, ClassSolver, EigenResult, Route};
use num_complex::Complex;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::Cache;
use crate::config::{ClassSelector, RouteSelector, RunConfig};
use crate::error::{io_err, CliError, Result};
use crate::output::{class_slug, f17, out_path, write_json, Csv};

pub const EIGEN_HEADER: &str = "class,ell,lambda,gap,route,residual";

pub fn threshold_body(ctx: &ThresholdContext) -> Value {
    json!({
        "Lambda": ctx.lambda(),
        "kappa": ctx.kappa(),
        "zeta1_pp": ctx.zeta_pp(),
        "zeta1_pp_fd": ctx.data.zeta1_second_deriv,
        "Lambda_minimized": ctx.data.lambda,
        "dpsi_abs": ctx.dpsi_abs(),
        "dpsi2_at_0": [ctx.mode.dpsi2_at_0.re, ctx.mode.dpsi2_at_0.im],
        "psi_residual": ctx.data.psi_residual,
    })
}

pub fn threshold(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    write_json(&out_path(&cfg.out, "threshold.json"), "threshold", threshold_body(ctx))?;
    eprintln!("Lambda = {:.15}  kappa = {:.15}", ctx.lambda(), ctx.kappa());
    Ok(())
}

pub fn dispersion(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let xs = cfg.xi.points();
    let rows: Vec<Vec<String>> = xs
        .par_iter()
        .map(|&xi| {
            let b = branch_eigenvalues(xi, cfg.branches, &BranchOptions::default())?;
            Ok(b.iter().map(|p| format!("{},{},{},{}", f17(xi), p.k, f17(p.omega), f17(p.residual))).collect())
        })
        .collect::<Result<_>>()?;
    let mut csv = Csv::new("xi,branch,omega,residual");
    for line in rows.into_iter().flatten() {
        csv.row(&[line]);
    }
    csv.write(&out_path(&cfg.out, "branches.csv"))?;
    threshold(cfg, ctx)
}

pub fn symbol(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let w = Complex::new(cfg.omega.unwrap_or(ctx.lambda() - cfg.delta), cfg.omega_im);
    let xs = cfg.xi.points();
    let vals: Vec<Complex<f64>> =
        xs.par_iter().map(|&xi| Ok(dtn_symbol(xi, w)?.value)).collect::<Result<_>>()?;
    let mut csv = Csv::new("xi,omega_re,omega_im,m_re,m_im");
    for (xi, m) in xs.iter().zip(vals) {
        csv.row(&[f17(*xi), f17(w.re), f17(w.im), f17(m.re), f17(m.im)]);
    }
    csv.write(&out_path(&cfg.out, "symbol.csv"))
}

fn single_class(cfg: &RunConfig) -> Result<SymmetryClass> {
    match cfg.class {
        ClassSelector::One(c) => Ok(c),
        ClassSelector::All => Err(CliError::Config("this command needs a single --class".into())),
    }
}

pub fn assemble(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let class = single_class(cfg)?;
    let ell = cfg.grid(class)[0];
    let omega = cfg.omega.unwrap_or(ctx.lambda() - cfg.delta);
    let blk = assemble_q(&Basis::new(class, cfg.n)?, ell, omega, ctx)?;
    let slug = class_slug(&class.label());
    let name = format!("assemble_{slug}.csv");
    let mut csv = Csv::new("i,j,value");
    for i in 0..blk.n {
        for j in 0..blk.n {
            csv.row(&[i.to_string(), j.to_string(), f17(blk.q[(i, j)])]);
        }
    }
    csv.write(&out_path(&cfg.out, &name))?;
    let asym = (&blk.q - blk.q.transpose()).amax() / blk.q.amax();
    write_json(
        &out_path(&cfg.out, &format!("assemble_{slug}.json")),
        "matrix",
        json!({
            "matrix_file": name,
            "class": class.label(),
            "N": blk.n,
            "ell": ell,
            "omega": omega,
            "rows": blk.n,
            "cols": blk.n,
            "cutoff": blk.cutoff,
            "residual_at_cutoff": blk.residual_at_cutoff,
            "relative_asymmetry": asym,
            "rank_one": blk.rank_one.as_slice(),
        }),
    )
}

fn routes(sel: RouteSelector) -> Vec<Route> {
    match sel {
        RouteSelector::Direct => vec![Route::Direct],
        RouteSelector::BirmanSchwinger => vec![Route::BirmanSchwinger],
        RouteSelector::Both => vec![Route::Direct, Route::BirmanSchwinger],
    }
}

/// Eigenvalue searches over the selected classes and grids, in deterministic order.
pub fn sweep(cfg: &RunConfig, classes: &[SymmetryClass], ctx: &ThresholdContext) -> Result<Vec<EigenResult>> {
    let cache = Cache::new(&cfg.out, cfg.cache);
    let tasks: Vec<(SymmetryClass, f64)> =
        classes.iter().flat_map(|&c| cfg.grid(c).into_iter().map(move |l| (c, l))).collect();
    let routes = routes(cfg.route);
    let nested: Vec<Vec<EigenResult>> = tasks
        .par_iter()
        .map(|&(class, ell)| {
            let label = class.label();
            let mut out = Vec::new();
            let mut solver = None;
            for &route in &routes {
                if let Some(r) = cache.get(&label, ell, cfg.n, route, cfg.tol) {
                    out.push(r);
                    continue;
                }
                if solver.is_none() {
                    solver = Some(ClassSolver::new(Basis::new(class, cfg.n)?, ell, ctx)?);
                }
                let s = solver.as_ref().unwrap();
                let r = match route {
                    Route::Direct => s.direct_with_tol(cfg.tol)?,
                    Route::BirmanSchwinger => s.birman_schwinger()?,
                };
                cache.put(&label, &r, cfg.tol);
                out.push(r);
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn eigen_csv(results: &[EigenResult]) -> Csv {
    let mut csv = Csv::new(EIGEN_HEADER);
    for r in results {
        csv.row(&[r.class.label(), f17(r.ell), f17(r.lambda), f17(r.gap), r.route.to_string(), f17(r.mu1_residual)]);
    }
    csv
}

pub fn solve(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let results = sweep(cfg, &cfg.classes(), ctx)?;
    eigen_csv(&results).write(&out_path(&cfg.out, "eigenvalues.csv"))?;
    for r in &results {
        eprintln!("{:>5} ell={:<8} gap={:.6e} ({})", r.class.label(), r.ell, r.gap, r.route);
    }
    Ok(())
}

/// Row of an eigenvalue table.
#[derive(Debug, Clone)]
pub struct EigenRow {
    pub class: SymmetryClass,
    pub ell: f64,
    pub gap: f64,
    pub route: String,
}

pub fn read_eigen_csv(path: &Path) -> Result<Vec<EigenRow>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    if lines.next() != Some(EIGEN_HEADER) {
        return Err(CliError::Config(format!("{}: expected header {EIGEN_HEADER}", path.display())));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = || CliError::Config(format!("{}: malformed row {l:?}", path.display()));
            if f.len() != 6 {
                return Err(bad());
            }
            Ok(EigenRow {
                class: f[0].parse().map_err(|_| bad())?,
                ell: f[1].parse().map_err(|_| bad())?,
                gap: f[3].parse().map_err(|_| bad())?,
                route: f[4].to_string(),
            })
        })
        .collect()
}

/// Leading constant predicted for a class.
pub fn reference_constant(class: SymmetryClass, consts: &AsymptoticConstants, ctx: &ThresholdContext, n: usize) -> Result<f64> {
    Ok(match class {
        SymmetryClass::Symmetric => consts.nu1,
        SymmetryClass::Antisymmetric => consts.nu2,
        SymmetryClass::Channel(m) => match consts.rho.get(&m) {
            Some(&r) => r,
            None => rho_constant_3d(ctx, m, n)?.rho,
        },
    })
}

/// Fit summary of one class; prefers direct-route rows.
pub fn fit_entry(class: SymmetryClass, pairs: &[(f64, f64)], reference: f64) -> Result<Value> {
    let f = fit_power_law(pairs)?;
    let p = class_exponent(class) as f64;
    let fixed = fixed_exponent_prefactor(pairs, p)?;
    Ok(json!({
        "class": class.label(),
        "exponent": f.exponent,
        "expected_exponent": p,
        "prefactor": f.prefactor,
        "fixed_exponent_prefactor": fixed,
        "reference_constant": reference,
        "prefactor_rel_diff": fixed / reference - 1.0,
        "r_squared": f.r_squared,
        "correction_order": correction_order(pairs, reference, p),
        "ell_grid": f.ell_grid,
        "gaps": f.gaps,
    }))
}

pub fn group_pairs(rows: &[EigenRow]) -> BTreeMap<String, (SymmetryClass, Vec<(f64, f64)>)> {
    let mut by: BTreeMap<String, (SymmetryClass, Vec<(f64, f64)>, bool)> = BTreeMap::new();
    for r in rows {
        let direct = r.route == "direct";
        let e = by.entry(r.class.label()).or_insert((r.class, Vec::new(), direct));
        if direct && !e.2 {
            // first direct row: drop the other route's points
            e.1.clear();
            e.2 = true;
        }
        if direct == e.2 {
            e.1.push((r.ell, r.gap));
        }
    }
    by.into_iter().map(|(k, (c, p, _))| (k, (c, p))).collect()
}

pub fn fit(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let input = cfg.input.clone().unwrap_or_else(|| out_path(&cfg.out, "eigenvalues.csv"));
    let rows = read_eigen_csv(&input)?;
    let consts = AsymptoticConstants::compute(ctx, cfg.n, &[])?;
    let mut fits = Vec::new();
    for (label, (class, pairs)) in group_pairs(&rows) {
        if let ClassSelector::One(c) = cfg.class {
            if c != class {
                continue;
            }
        }
        let entry = fit_entry(class, &pairs, reference_constant(class, &consts, ctx, cfg.n)?)?;
        eprintln!("{label:>5}: exponent {:.4} (expected {})", entry["exponent"], entry["expected_exponent"]);
        fits.push(entry);
    }
    if fits.is_empty() {
        return Err(CliError::Config(format!("{}: no rows for the selected class", input.display())));
    }
    write_json(&out_path(&cfg.out, "fit.json"), "fit", json!({ "input": input.display().to_string(), "fits": fits }))
}

pub fn constants_body(ctx: &ThresholdContext, n: usize, channels: &[i32]) -> Result<Value> {
    let c = AsymptoticConstants::compute(ctx, n, channels)?;
    let mut uncorrected = BTreeMap::new();
    for &m in channels {
        uncorrected.insert(m.to_string(), rho_constant_3d(ctx, m, n)?.rho_uncorrected);
    }
    let mut body = serde_json::to_value(&c).expect("constants serialize");
    body["rho_without_factorial"] = json!(uncorrected);
    body["N"] = json!(n);
    Ok(body)
}

pub fn constants(cfg: &RunConfig, ctx: &ThresholdContext) -> Result<()> {
    let channels: Vec<i32> = match cfg.class {
        ClassSelector::One(SymmetryClass::Channel(m)) => vec![m],
        _ => (-2..=2).collect(),
    };
    let body = constants_body(ctx, cfg.n, &channels)?;
    eprintln!("nu1 = {}  nu2 = {}", body["nu1"], body["nu2"]);
    write_json(&out_path(&cfg.out, "constants.json"), "constants", body)
}
