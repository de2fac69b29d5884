use std::path::Path;
use std::time::Instant;

use horotorus::diophantine::{common_denominator, minkowski_zeta_bound, weyl_bound, weyl_count, zeta, WeylInstance};
use horotorus::enumerate::DEFAULT_NODE_BUDGET;
use horotorus::fundamental::reduce_with_budget;
use horotorus::geometry::{TorusCoords, TorusPoint};
use horotorus::lattice::{siegel_transform, LatticeDescriptor, Norm, RadialStep};
use horotorus::measure::{fourier_spectrum, max_concentration};
use horotorus::orbit::{gamma_orbit, orbit_pushforward, EmpiricalTorusMeasure, NeighborhoodV};

use crate::acceptance::{run_criteria, suite_criteria};
use crate::config::{ExperimentConfig, Kind, Suite};
use crate::error::Result;
use crate::fit::decay_fit;
use crate::output::{csv_writer, fmt_f64, write_json};
use crate::report::RunReport;

pub const REPORT_FILE: &str = "report.json";

/// Runs the configured experiment, writes its artifacts and `report.json`
/// under `config.out`, and returns the report. Hard invariant failures show
/// up as failed checks; configuration, budget and precision problems as
/// errors.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let mut report = match config.kind {
        Kind::Reduce => run_reduce(config)?,
        Kind::Zeta => run_zeta(config)?,
        Kind::Weyl => run_weyl(config)?,
        Kind::Orbit => run_orbit(config)?,
        Kind::GammaOrbit => run_gamma_orbit(config)?,
        Kind::Fourier => run_fourier(config)?,
        Kind::Concentration => run_concentration(config)?,
        Kind::Siegel => run_siegel(config)?,
        Kind::Acceptance => run_acceptance(config)?,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    write_json(&config.out.join(REPORT_FILE), &report)?;
    Ok(report)
}

fn artifact(report: &mut RunReport, out: &Path, name: &str) -> std::path::PathBuf {
    report.artifacts.push(name.to_string());
    out.join(name)
}

fn coord_strings(p: &TorusPoint) -> Vec<String> {
    match p.coords() {
        TorusCoords::Rational(r) => r.iter().map(|x| format!("{}/{}", x.numer(), x.denom())).collect(),
        TorusCoords::Float(f) => f.iter().map(|&x| fmt_f64(x)).collect(),
    }
}

fn run_reduce(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![4]);
    let g = cfg.start_matrix()?;
    let r = reduce_with_budget(&g, cfg.budget.unwrap_or(DEFAULT_NODE_BUDGET))?;
    let back = r.rep.mul_int(&r.gamma)?;
    let resid = back.max_abs_diff(&g) / r.fvalue.max(1.0);
    report.check("gamma in SL_d(Z)", r.gamma.is_in_gamma(), format!("det = {}", r.gamma.det()));
    report.check("g = rep·gamma", resid <= 1e-9, format!("residual {resid:.2e}"));
    if g.dim() <= 3 {
        report.check("certified minimum", r.certificate.certified, format!("{} candidates", r.certificate.candidates));
    }
    report.value("fvalue", r.fvalue);
    write_json(&artifact(&mut report, &cfg.out, "reduced.json"), &r)?;
    Ok(report)
}

fn run_zeta(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![1, 2]);
    let b = cfg.torus_point(cfg.torus_len())?;
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "zeta.csv"))?;
    w.write_record(["b", "T", "zeta"])?;
    let mut over = 0;
    for t in cfg.times() {
        let z = zeta(&b, t)?;
        if z > minkowski_zeta_bound(b.dim(), t) {
            over += 1;
        }
        w.write_record([coord_strings(&b).join(" "), fmt_f64(t), z.to_string()])?;
        report.value("zeta", z as f64);
    }
    w.flush()?;
    report.check("Dirichlet bound ceil(T^(d/(2d+1)))", over == 0, format!("{over} violations"));
    Ok(report)
}

fn run_weyl(cfg: &ExperimentConfig) -> Result<RunReport> {
    const C_W_MAX: f64 = 20.0;
    let mut report = RunReport::new(cfg.clone(), vec![3]);
    let alpha = cfg.torus_point(1)?;
    let rho = cfg.rho.unwrap_or(0.05);
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "weyl.csv"))?;
    w.write_record(["alpha", "T", "rho", "count", "bound"])?;
    let mut c_w: f64 = 0.0;
    for t in cfg.times() {
        let inst = WeylInstance::new(alpha.clone(), t.round() as u64, 0.0, rho)?;
        let count = weyl_count(&inst);
        let bound = weyl_bound(&inst)?;
        c_w = c_w.max(count as f64 / inst.t as f64 / bound);
        w.write_record([coord_strings(&alpha)[0].clone(), inst.t.to_string(), fmt_f64(rho), count.to_string(), fmt_f64(bound)])?;
    }
    w.flush()?;
    report.value("C_W", c_w);
    report.check("C_W within limit", c_w <= C_W_MAX, format!("C_W = {c_w:.4}, limit {C_W_MAX}"));
    Ok(report)
}

fn orbit_at(cfg: &ExperimentConfig, t: f64) -> Result<EmpiricalTorusMeasure> {
    let v = NeighborhoodV::standard(cfg.sig()?);
    Ok(orbit_pushforward(&cfg.start()?, t, &v, cfg.samples, cfg.seed)?)
}

fn run_orbit(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![6, 7, 10]);
    let (m, n, d) = (cfg.m, cfg.n, cfg.dim());
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "orbit.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..m * n).map(|k| format!("u_{}_{}", k / n + 1, k % n + 1)));
    header.extend((0..d * d).map(|k| format!("gamma_{}_{}", k / d + 1, k % d + 1)));
    header.extend((0..d).map(|k| format!("sigma_{}", k + 1)));
    header.push("height_after".into());
    w.write_record(&header)?;
    let mut non_integral = 0;
    for t in cfg.times() {
        let nu = orbit_at(cfg, t)?;
        for s in nu.meta() {
            non_integral += usize::from(!s.gamma.is_in_gamma());
            let mut row = vec![fmt_f64(t)];
            row.extend(s.u.iter().map(|&x| fmt_f64(x)));
            row.extend(s.gamma.row_major().iter().map(|x| x.to_string()));
            row.extend(coord_strings(&s.sigma_point));
            row.push(fmt_f64(s.height_after));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    report.check("gamma in SL_d(Z)", non_integral == 0, format!("{non_integral} failures"));
    Ok(report)
}

fn run_gamma_orbit(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![8]);
    let sig = cfg.sig()?;
    let v = NeighborhoodV::standard(sig);
    let x_rep = reduce_with_budget(&cfg.start_matrix()?, cfg.budget.unwrap_or(DEFAULT_NODE_BUDGET))?.rep;
    let m0 = cfg.m0();
    let eps = cfg.epsilon.unwrap_or(0.1);
    let mut vectors = csv_writer(&artifact(&mut report, &cfg.out, "gamma_orbit.csv"))?;
    let mut header = vec!["s".to_string()];
    header.extend((0..cfg.dim()).map(|k| format!("v_{}", k + 1)));
    vectors.write_record(&header)?;
    let mut summary = csv_writer(&artifact(&mut report, &cfg.out, "gamma_orbit_summary.csv"))?;
    summary.write_record(["s", "kept_fraction", "max_bin_mass", "max_sup_norm", "radius_ratio"])?;
    let mut bins = Vec::new();
    let mut r_fit: f64 = 0.0;
    for s in cfg.times() {
        let orbit = gamma_orbit(&x_rep, &m0, s, &v, cfg.samples, cfg.seed, eps)?;
        for vec in &orbit.vectors {
            let mut row = vec![fmt_f64(s)];
            row.extend(vec.iter().map(|x| x.to_string()));
            vectors.write_record(&row)?;
        }
        let ratio = orbit.max_sup_norm() as f64 / (sig.n() as f64 * s).exp();
        r_fit = r_fit.max(ratio);
        let mass = orbit.max_bin_mass();
        if mass > 0.0 {
            bins.push((s, mass));
        }
        summary.write_record([
            fmt_f64(s),
            fmt_f64(orbit.kept_fraction),
            fmt_f64(mass),
            orbit.max_sup_norm().to_string(),
            fmt_f64(ratio),
        ])?;
    }
    vectors.flush()?;
    summary.flush()?;
    report.value("R_fit", r_fit);
    if bins.len() >= crate::fit::MIN_POINTS {
        report.fit("max_bin_mass", decay_fit(&bins)?);
    }
    Ok(report)
}

fn run_fourier(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![7, 9]);
    let d = cfg.dim();
    let b0 = cfg.torus_point(d)?;
    let q = b0.is_rational().then(|| common_denominator(&b0)).transpose()?;
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "fourier.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..d).map(|k| format!("m_{}", k + 1)));
    header.extend(["re", "im", "abs"].map(String::from));
    w.write_record(&header)?;
    let mut series = Vec::new();
    let mut lattice_dev: f64 = 0.0;
    let mut floor = 0.0;
    for t in cfg.times() {
        let spec = fourier_spectrum(&orbit_at(cfg, t)?, cfg.max_freq)?;
        floor = spec.noise_floor();
        for (m, c) in &spec.coeffs {
            let mut row = vec![fmt_f64(t)];
            row.extend(m.iter().map(|x| x.to_string()));
            row.extend([fmt_f64(c.re), fmt_f64(c.im), fmt_f64(c.norm())]);
            w.write_record(&row)?;
            if let Some(q) = q {
                if m.iter().all(|x| x % q == 0) {
                    lattice_dev = lattice_dev.max((c - num_complex::Complex64::new(1.0, 0.0)).norm());
                }
            }
        }
        series.push((t, spec.max_nonzero(cfg.max_freq)));
    }
    w.flush()?;
    report.value("noise_floor", floor);
    if let Some(q) = q {
        report.check(
            "coefficients on qZ^d equal 1",
            lattice_dev <= 1e-12,
            format!("q = {q}, max deviation {lattice_dev:.1e}"),
        );
    }
    // no claim of decay below the noise floor
    let above: Vec<(f64, f64)> = series.iter().copied().take_while(|p| p.1 > floor).collect();
    if above.len() >= crate::fit::MIN_POINTS {
        report.fit("max_nonzero_coefficient", decay_fit(&above)?);
    }
    Ok(report)
}

fn run_concentration(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![9]);
    let rho = cfg.rho.unwrap_or(0.05);
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "concentration.csv"))?;
    let mut header = vec!["t".to_string()];
    header.extend((0..cfg.dim()).map(|k| format!("p_{}", k + 1)));
    header.extend(["rho", "mass"].map(String::from));
    w.write_record(&header)?;
    for t in cfg.times() {
        let (p, mass) = max_concentration(&orbit_at(cfg, t)?, rho)?;
        let mut row = vec![fmt_f64(t)];
        row.extend(p.to_f64().iter().map(|&x| fmt_f64(x)));
        row.extend([fmt_f64(rho), fmt_f64(mass)]);
        w.write_record(&row)?;
        report.value(&format!("mass_t{t}"), mass);
    }
    w.flush()?;
    Ok(report)
}

/// Volume of the Euclidean unit ball in `R^d`.
fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * unit_ball_volume(d - 2),
    }
}

fn run_siegel(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = RunReport::new(cfg.clone(), vec![13]);
    let radius = cfg.rho.unwrap_or(0.3);
    let d = cfg.dim();
    let target = unit_ball_volume(d) * radius.powi(d as i32);
    let f = RadialStep::indicator(Norm::Euclidean, radius);
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "siegel.csv"))?;
    w.write_record(["t", "samples", "mean", "stderr", "target"])?;
    for t in cfg.times() {
        let nu = orbit_at(cfg, t)?;
        let values = nu
            .meta()
            .iter()
            .map(|s| siegel_transform(&f, &LatticeDescriptor::new(s.xi.clone())))
            .collect::<horotorus::Result<Vec<f64>>>()?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let se = (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
        w.write_record([fmt_f64(t), nu.len().to_string(), fmt_f64(mean), fmt_f64(se), fmt_f64(target)])?;
        let rel = (mean - target).abs() / target;
        report.check(&format!("Siegel mean at t = {t}"), rel <= 0.1, format!("mean {mean:.5}, target {target:.5}"));
    }
    w.flush()?;
    Ok(report)
}

fn run_acceptance(cfg: &ExperimentConfig) -> Result<RunReport> {
    let ids = match &cfg.criteria {
        Some(ids) => ids.clone(),
        None => suite_criteria(cfg.suite.unwrap_or(Suite::All)),
    };
    let mut report = RunReport::new(cfg.clone(), ids.clone());
    let outcomes = run_criteria(&ids);
    let mut w = csv_writer(&artifact(&mut report, &cfg.out, "acceptance.csv"))?;
    w.write_record(["criterion", "name", "passed", "summary"])?;
    for o in &outcomes {
        println!("{}", o.line());
        w.write_record([o.id.to_string(), o.name.clone(), o.passed.to_string(), o.summary.clone()])?;
        report.check(&format!("criterion {}", o.id), o.passed, o.summary.clone());
        report.value(&format!("elapsed_s_{}", o.id), o.elapsed_s);
    }
    w.flush()?;
    Ok(report)
}
