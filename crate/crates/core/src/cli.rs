//! Command-line front end: argument parsing, configuration files and CSV/JSON output.

use crate::kernel::{dyadic_grid, sample, verify_expansion};
use crate::number_theory::{classes_up_to, representations, t_star, CriticalPair};
use crate::pde::gramian::gramian;
use crate::pde::studies::{bump_control, psi_profile};
use crate::pde::{solve_linear, solve_nonlinear, solve_second_order, Grid, Trajectory};
use crate::spectral::{frame, paley_wiener_check};
use crate::synthesis::{integral, steering_spectrum, ControlSpec, NuRule};
use crate::unreachable::{constants, eta_triple};
use crate::verify::{verify_all, Status, VerifyConfig};
use crate::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "kdvcrit", version, about = "KdV computations at critical lengths")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical length classes N ≤ nmax.
    Lengths {
        #[arg(long)]
        nmax: i64,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// η, Γ, Λ, E, E₁, F, F₁ and E₁/E of a pair.
    Constants {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        json: bool,
    },
    /// Roots, det Q, P, Ξ, G and H along a range of real z.
    Spectral {
        #[arg(long = "L")]
        length: f64,
        /// `start:end:points`
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// ∫B(z, x) dx on a z grid.
    Kernel {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, allow_hyphen_values = true)]
        zmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        zmax: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Large-z expansion report of ∫B as JSON.
    KernelAsym {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 1e3)]
        z0: f64,
        #[arg(long, default_value_t = 10)]
        points: usize,
    },
    /// Run one of the solvers from a JSON configuration.
    Simulate {
        #[arg(long, value_enum)]
        system: System,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        nt: Option<usize>,
        #[arg(long = "T")]
        t_final: Option<f64>,
    },
    /// Singular values of the control-to-state map and their restriction to M_N.
    Gramian {
        #[arg(long, requires = "l")]
        k: Option<i64>,
        #[arg(long, requires = "k")]
        l: Option<i64>,
        /// Non-critical length; used when no pair is given.
        #[arg(long = "L", conflicts_with_all = ["k", "l"])]
        length: Option<f64>,
        #[arg(long = "T", default_value_t = 2.0)]
        t_final: f64,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = 400)]
        nt: usize,
    },
    /// Build a control steering 0 to 0 and write it as CSV.
    Synthesize {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long = "T")]
        t_final: f64,
        #[arg(long, default_value = "auto")]
        case: String,
        #[arg(long, value_enum, default_value_t = NuChoice::LengthScaled)]
        nu: NuChoice,
        #[arg(long)]
        out: PathBuf,
    },
    /// Signs of the quadratic integral over a sweep of horizons.
    VerifySigns {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        tsweep: Vec<f64>,
    },
    /// The full acceptance suite as a JSON report.
    VerifyAll(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub k: i64,
    #[arg(long)]
    pub l: i64,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Criterion names, modules or numbers, comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Record runtimes and enforce the per-criterion budgets (the report is then not reproducible).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    gramian_nx: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum System {
    Linear,
    SecondOrder,
    Nonlinear,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NuChoice {
    LengthScaled,
    Literal,
}

/// Configuration file of `simulate`.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(rename = "L")]
    pub length: Option<f64>,
    pub k: Option<i64>,
    pub l: Option<i64>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
    #[serde(rename = "T")]
    pub t_final: Option<f64>,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    pub save_every: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControlConfig {
    #[default]
    Zero,
    /// Smooth bump on `[a, b]` with peak `amplitude`.
    Bump { a: f64, b: f64, amplitude: f64 },
    /// `amplitude · sin(ω t)`.
    Sine { amplitude: f64, omega: f64 },
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    #[default]
    Zero,
    /// `Re(c Ψ(0, x))` of the pair; needs `k`, `l`.
    Psi { re: f64, im: f64 },
    /// Smooth bump centred at `center` with half-width `width`.
    Bump { center: f64, width: f64, amplitude: f64 },
}

/// Configuration file of `verify-all`.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyFile {
    pub seed: Option<u64>,
    pub only: Option<Vec<String>>,
    pub gramian_nx: Option<usize>,
    pub timings: Option<bool>,
}

enum Failure {
    Usage(String),
    Run(Error),
    Checks,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) | Error::NotCritical(_) => Failure::Usage(e.to_string()),
            e => Failure::Run(e),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

/// 17 significant digits.
pub fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses argv, runs the subcommand and returns the exit code: 0 success, 1 failed check or
/// runtime error, 2 usage error.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut out = std::io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(()) => 0,
        Err(Failure::Checks) => 1,
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Usage(m)) => {
            eprintln!("usage error: {m}");
            2
        }
    }
}

fn emit_json(out: &mut dyn Write, v: &impl Serialize) -> std::result::Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::Run(Error::Config(e.to_string())))?;
    writeln!(out, "{s}").map_err(|e| Failure::Run(Error::Config(e.to_string())))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn write_rows(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn cjson(c: C) -> Value {
    json!({ "re": c.re, "im": c.im })
}

fn pair(p: &PairArgs) -> Result<CriticalPair> {
    CriticalPair::new(p.k, p.l)
}

fn run(cmd: Command, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(|e| Failure::Run(Error::Config(e.to_string())));
    match cmd {
        Command::Lengths { nmax, json, csv } => {
            let rows: Vec<Value> = classes_up_to(nmax)
                .iter()
                .map(|c| {
                    json!({
                        "N": c.n,
                        "L": c.length,
                        "pairs": c.pairs.iter().map(|p| [p.k, p.l]).collect::<Vec<_>>(),
                        "n_L": c.n_l,
                        "n_L_pos": c.n_l_pos,
                        "dim_M_N": c.dim_mn,
                        "T_star": t_star(c).ok(),
                    })
                })
                .collect();
            if json {
                return emit_json(out, &rows);
            }
            let sep = if csv { "," } else { "\t" };
            w(out, ["N", "L", "pairs", "n_L", "n_L_pos", "dim_M_N", "T_star"].join(sep))?;
            for c in classes_up_to(nmax) {
                let pairs: Vec<String> = c.pairs.iter().map(|p| format!("({} {})", p.k, p.l)).collect();
                let ts = t_star(&c).map(fmt_f).unwrap_or_default();
                w(out, [c.n.to_string(), fmt_f(c.length), pairs.join(" "), c.n_l.to_string(), c.n_l_pos.to_string(), c.dim_mn.to_string(), ts].join(sep))?;
            }
            Ok(())
        }
        Command::Constants { pair: pa, json } => {
            let p = pair(&pa)?;
            let d = constants(&p)?;
            let eta = eta_triple(&p)?.eta;
            let ratio = (!p.case_e0).then(|| d.e1 / d.e);
            let v = json!({
                "k": p.k, "l": p.l, "N": p.n, "L": p.length, "p": p.p,
                "eta": eta.iter().map(|e| cjson(*e)).collect::<Vec<_>>(),
                "Gamma": cjson(d.gamma), "Lambda": cjson(d.lambda),
                "E": cjson(d.e), "E1": cjson(d.e1), "F": cjson(d.f), "F1": cjson(d.f1),
                "E1_over_E": ratio.map(cjson),
                "case_e0": p.case_e0,
            });
            if json {
                return emit_json(out, &v);
            }
            let c = |z: C| format!("{} {:+.16e}i", fmt_f(z.re), z.im);
            w(out, format!("pair ({}, {})  N = {}  L = {}  p = {}", p.k, p.l, p.n, fmt_f(p.length), fmt_f(p.p)))?;
            for (j, e) in eta.iter().enumerate() {
                w(out, format!("eta{}   {}", j + 1, c(*e)))?;
            }
            for (name, z) in [("Gamma", d.gamma), ("Lambda", d.lambda), ("E", d.e), ("E1", d.e1), ("F", d.f), ("F1", d.f1)] {
                w(out, format!("{name:<7}{}", c(z)))?;
            }
            match ratio {
                Some(r) => w(out, format!("E1/E   {}", c(r)))?,
                None => w(out, "E1/E   undefined (E = 0)".into())?,
            }
            w(out, format!("case   {}", if p.case_e0 { "E = 0 (3 | 2k+l)" } else { "E != 0" }))
        }
        Command::Spectral { length, z, out: path } => {
            let parts: Vec<&str> = z.split(':').collect();
            let bad = || Failure::Usage(format!("--z expects start:end:points, got {z}"));
            if parts.len() != 3 {
                return Err(bad());
            }
            let a: f64 = parts[0].parse().map_err(|_| bad())?;
            let b: f64 = parts[1].parse().map_err(|_| bad())?;
            let n: usize = parts[2].parse().map_err(|_| bad())?;
            if n < 1 || !(length > 0.0) {
                return Err(bad());
            }
            let mut header = vec!["z".to_string()];
            for j in 1..=3 {
                header.push(format!("lambda{j}_re"));
                header.push(format!("lambda{j}_im"));
            }
            for q in ["detQ", "P", "Xi", "G", "H"] {
                header.push(format!("{q}_re"));
                header.push(format!("{q}_im"));
            }
            let rows = (0..n).map(|i| {
                let zz = if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                let f = frame(C::new(zz, 0.0), length);
                let mut r = vec![fmt_f(zz)];
                let vals = [f.lambda[0], f.lambda[1], f.lambda[2], f.det_q.to_c(), f.p.to_c(), f.xi, f.g.to_c(), f.h.to_c()];
                for v in vals {
                    r.push(fmt_f(v.re));
                    r.push(fmt_f(v.im));
                }
                r
            });
            Ok(write_rows(&path, &header, rows)?)
        }
        Command::Kernel { pair: pa, zmin, zmax, points, out: path } => {
            let p = pair(&pa)?;
            if points < 2 || !(zmax > zmin) {
                return Err(Failure::Usage("need zmax > zmin and at least two points".into()));
            }
            let mut rows = Vec::with_capacity(points);
            for i in 0..points {
                let z = if zmin > 0.0 {
                    zmin * (zmax / zmin).powf(i as f64 / (points - 1) as f64)
                } else {
                    zmin + (zmax - zmin) * i as f64 / (points - 1) as f64
                };
                let (v, pole) = match sample(&p, z) {
                    Ok(s) => (s.int_b, 0),
                    Err(Error::NearPole { .. }) => (C::new(f64::NAN, f64::NAN), 1),
                    Err(e) => return Err(e.into()),
                };
                rows.push(vec![fmt_f(z), fmt_f(v.re), fmt_f(v.im), pole.to_string()]);
            }
            Ok(write_rows(&path, &["z", "intB_re", "intB_im", "near_pole"].map(String::from), rows.into_iter())?)
        }
        Command::KernelAsym { pair: pa, z0, points } => {
            let r = verify_expansion(&pair(&pa)?, &dyadic_grid(z0, points))?;
            emit_json(out, &r)
        }
        Command::Simulate { system, config, out: path, nx, nt, t_final } => simulate(system, &config, &path, nx, nt, t_final, out),
        Command::Gramian { k, l, length, t_final, nx, nt } => {
            let report = match (k, l, length) {
                (Some(k), Some(l), None) => {
                    let p = CriticalPair::new(k, l)?;
                    let class = representations(p.n)?;
                    gramian(&Grid::new(p.length, nx, t_final, nt)?, Some(&class))?
                }
                (None, None, Some(len)) => gramian(&Grid::new(len, nx, t_final, nt)?, None)?,
                _ => return Err(Failure::Usage("give either --k and --l or --L".into())),
            };
            emit_json(out, &report)
        }
        Command::Synthesize { pair: pa, t_final, case, nu, out: path } => {
            let p = pair(&pa)?;
            let rule = match nu {
                NuChoice::LengthScaled => NuRule::LengthScaled,
                NuChoice::Literal => NuRule::Literal,
            };
            let spec = ControlSpec::new(&p, t_final, rule)?;
            match case.as_str() {
                "auto" => {}
                "1" | "2" if case == spec.case.to_string() => {}
                "1" | "2" => return Err(Failure::Usage(format!("pair ({}, {}) is case {}", p.k, p.l, spec.case))),
                _ => return Err(Failure::Usage(format!("--case expects auto, 1 or 2, got {case}"))),
            }
            let s = steering_spectrum(&spec)?;
            let inside: Vec<usize> = (0..s.t.len()).filter(|&i| s.t[i] >= -1e-12 * t_final && s.t[i] <= t_final * (1.0 + 1e-12)).collect();
            let rows = inside.iter().map(|&i| vec![fmt_f(s.t[i]), fmt_f(s.u_time[i]), fmt_f(s.w_time[i].re), fmt_f(s.w_time[i].im)]);
            write_rows(&path, &["t", "u", "w_re", "w_im"].map(String::from), rows)?;
            let dt = if s.t.len() > 1 { s.t[1] - s.t[0] } else { t_final };
            let u: Vec<f64> = inside.iter().map(|&i| s.u_time[i]).collect();
            let pw = paley_wiener_check(&u, dt, t_final, spec.z_max, 64, None);
            let r = integral(&spec)?;
            emit_json(out, &json!({ "spec": spec, "spectrum": s, "paley_wiener": pw, "integral": r, "normalisation": "values divided by exp(log_peak)" }))
        }
        Command::VerifySigns { pair: pa, tsweep } => {
            let p = pair(&pa)?;
            if tsweep.is_empty() {
                return Err(Failure::Usage("empty --tsweep".into()));
            }
            let name = if p.case_e0 { "J" } else { "I" };
            w(out, format!("pair ({}, {})  case {}  p = {}", p.k, p.l, if p.case_e0 { 2 } else { 1 }, fmt_f(p.p)))?;
            w(out, format!("T,Re {name},Im {name},W,Re/W,Im/(T W),gamma,nu,status"))?;
            let mut ok = true;
            for t in tsweep {
                let r = integral(&ControlSpec::new(&p, t, NuRule::LengthScaled)?)?;
                let pass = r.converged && r.value.im < 0.0 && (0.7..=1.3).contains(&r.re_ratio);
                ok &= pass;
                w(
                    out,
                    [t, r.value.re, r.value.im, r.w_energy, r.re_ratio, r.im_ratio_per_t, r.gamma, r.nu]
                        .map(fmt_f)
                        .join(",")
                        + if pass { ",pass" } else { ",fail" },
                )?;
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
        Command::VerifyAll(a) => {
            let file: VerifyFile = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
                }
                None => VerifyFile::default(),
            };
            let base = VerifyConfig::default();
            let cfg = VerifyConfig {
                seed: a.seed.or(file.seed).unwrap_or(base.seed),
                only: if a.only.is_empty() { file.only.unwrap_or_default() } else { a.only },
                timings: a.timings || file.timings.unwrap_or(false),
                gramian_nx: a.gramian_nx.or(file.gramian_nx).unwrap_or(base.gramian_nx),
            };
            let known = crate::verify::criteria();
            for s in &cfg.only {
                if !known.iter().any(|c| c.name == s || c.module == s || s.parse::<u8>().ok() == Some(c.id)) {
                    return Err(Failure::Usage(format!("unknown criterion {s}")));
                }
            }
            let report = verify_all(&cfg);
            match &a.out {
                Some(path) => {
                    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
                    emit_json(&mut f, &report)?;
                    for c in &report.checks {
                        w(out, format!("{:>2} {:<14} {:?}", c.id, c.name, c.status))?;
                    }
                }
                None => emit_json(out, &report)?,
            }
            if report.checks.iter().any(|c| c.status == Status::Fail) {
                Err(Failure::Checks)
            } else {
                Ok(())
            }
        }
    }
}

fn simulate(
    system: System,
    config: &Path,
    path: &Path,
    nx: Option<usize>,
    nt: Option<usize>,
    t_final: Option<f64>,
    out: &mut dyn Write,
) -> std::result::Result<(), Failure> {
    let text = std::fs::read_to_string(config).map_err(|e| io_err(config, e))?;
    let cfg: SimConfig = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let pair = match (cfg.k, cfg.l) {
        (Some(k), Some(l)) => Some(CriticalPair::new(k, l)?),
        (None, None) => None,
        _ => return Err(Failure::Usage("config needs both k and l".into())),
    };
    let length = match (cfg.length, pair) {
        (Some(_), Some(_)) => return Err(Failure::Usage("config gives both L and (k, l)".into())),
        (Some(len), None) => len,
        (None, Some(p)) => p.length,
        (None, None) => return Err(Failure::Usage("config needs L or (k, l)".into())),
    };
    let nx = nx.or(cfg.nx).unwrap_or(128);
    let nt = nt.or(cfg.nt).unwrap_or(512);
    let t_final = t_final.or(cfg.t_final).unwrap_or(2.0);
    let save_every = cfg.save_every.unwrap_or(1).max(1);
    let grid = Grid::new(length, nx, t_final, nt)?;
    let u = match cfg.control {
        ControlConfig::Zero => vec![0.0; nt + 1],
        ControlConfig::Bump { a, b, amplitude } => bump_control(&grid, a, b, amplitude),
        ControlConfig::Sine { amplitude, omega } => grid.sample_control(|t| amplitude * (omega * t).sin()),
    };
    let y0 = match cfg.initial {
        InitialConfig::Zero => vec![0.0; nx],
        InitialConfig::Psi { re, im } => {
            let p = pair.ok_or_else(|| Failure::Usage("initial kind psi needs k and l".into()))?;
            psi_profile(&p, C::new(re, im), 0.0, &grid.x())?
        }
        InitialConfig::Bump { center, width, amplitude } => {
            grid.sample_profile(|x| amplitude * crate::pde::studies::bump((x - center) / width) / crate::pde::studies::bump(0.0))
        }
    };
    let summary = |tr: &Trajectory| json!({ "final_l2": tr.l2_norms().last(), "audit": tr.audit, "xnorm": tr.xnorm });
    let report = match system {
        System::Linear => {
            let tr = solve_linear(&grid, &y0, &u, None, save_every)?;
            write_trajectory(path, &tr)?;
            summary(&tr)
        }
        System::Nonlinear => {
            let tr = solve_nonlinear(&grid, &y0, &u, save_every)?;
            write_trajectory(path, &tr)?;
            summary(&tr)
        }
        System::SecondOrder => {
            if y0.iter().any(|v| *v != 0.0) {
                return Err(Failure::Usage("the second-order system starts from rest".into()));
            }
            let (y1, y2) = solve_second_order(&grid, &u, save_every)?;
            let second = second_path(path);
            write_trajectory(path, &y1)?;
            write_trajectory(&second, &y2)?;
            json!({ "y1": summary(&y1), "y2": summary(&y2), "y2_file": second.display().to_string() })
        }
    };
    emit_json(out, &report)
}

/// `traj.csv` → `traj_y2.csv`.
pub fn second_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}_y2{ext}"))
}

/// Header `t, x_1, …, x_nx`, one row per stored time node.
pub fn write_trajectory(path: &Path, tr: &Trajectory) -> Result<()> {
    let mut header = vec!["t".to_string()];
    header.extend(tr.grid.x().into_iter().map(fmt_f));
    let rows = tr.saved_steps.iter().zip(&tr.states).map(|(n, y)| {
        let mut r = vec![fmt_f(*n as f64 * tr.grid.dt)];
        r.extend(y.iter().map(|v| fmt_f(*v)));
        r
    });
    write_rows(path, &header, rows)
}

/// Reads a trajectory CSV back as `(x, t, states)`.
pub fn read_trajectory(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let err = |e: &dyn std::fmt::Display| Error::Config(format!("{}: {e}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| err(&e))?;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| err(&e));
    let x = r.headers().map_err(|e| err(&e))?.iter().skip(1).map(parse).collect::<Result<Vec<f64>>>()?;
    let (mut t, mut ys) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec.map_err(|e| err(&e))?;
        let v = rec.iter().map(parse).collect::<Result<Vec<f64>>>()?;
        t.push(v[0]);
        ys.push(v[1..].to_vec());
    }
    Ok((x, t, ys))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        std::env::temp_dir().join(format!("kdvcrit-{}-{name}", std::process::id()))
    }

    #[test]
    fn exit_codes() {
        assert_eq!(dispatch(["kdvcrit", "lengths", "--nmax", "10", "--json"]), 0);
        assert_eq!(dispatch(["kdvcrit", "constants", "--k", "1", "--l", "1"]), 0);
        assert_eq!(dispatch(["kdvcrit", "lengths", "--bogus"]), 2);
        assert_eq!(dispatch(["kdvcrit", "nonsense"]), 2);
        assert_eq!(dispatch(["kdvcrit", "constants", "--k", "1", "--l", "3"]), 2);
        assert_eq!(dispatch(["kdvcrit", "verify-all", "--only", "nothing"]), 2);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let cfg = tmp("bad.json");
        std::fs::write(&cfg, r#"{"L": 5.0, "nx": 32, "colour": 1}"#).unwrap();
        let out = tmp("bad.csv");
        let code = dispatch(["kdvcrit", "simulate", "--system", "linear", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 2);
        let _ = std::fs::remove_file(cfg);
    }

    #[test]
    fn trajectory_round_trip_and_flag_precedence() {
        let cfg = tmp("sim.json");
        std::fs::write(
            &cfg,
            r#"{"k": 2, "l": 1, "nx": 48, "nt": 40, "T": 1.0, "save_every": 10,
                "control": {"kind": "bump", "a": 0.0, "b": 1.0, "amplitude": 0.3},
                "initial": {"kind": "psi", "re": 0.2, "im": 0.1}}"#,
        )
        .unwrap();
        let out = tmp("traj.csv");
        let code = dispatch(["kdvcrit", "simulate", "--system", "linear", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--nx", "32"]);
        assert_eq!(code, 0);
        let (x, t, ys) = read_trajectory(&out).unwrap();
        assert_eq!(x.len(), 32);
        assert_eq!(t, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let p = CriticalPair::new(2, 1).unwrap();
        let g = Grid::new(p.length, 32, 1.0, 40).unwrap();
        let tr = solve_linear(&g, &psi_profile(&p, C::new(0.2, 0.1), 0.0, &g.x()).unwrap(), &bump_control(&g, 0.0, 1.0, 0.3), None, 10).unwrap();
        assert_eq!(ys, tr.states);
        assert_eq!(x, g.x());

        let out2 = tmp("second.csv");
        std::fs::write(&cfg, r#"{"k": 2, "l": 1, "nx": 32, "nt": 40, "T": 1.0, "control": {"kind": "sine", "amplitude": 0.1, "omega": 3.0}}"#).unwrap();
        assert_eq!(dispatch(["kdvcrit", "simulate", "--system", "second-order", "--config", cfg.to_str().unwrap(), "--out", out2.to_str().unwrap()]), 0);
        assert!(second_path(&out2).exists());
        for f in [cfg, out, out2.clone(), second_path(&out2)] {
            let _ = std::fs::remove_file(f);
        }
    }

    #[test]
    fn formats_seventeen_digits() {
        let v = 0.1 + 0.2;
        assert_eq!(fmt_f(v).parse::<f64>().unwrap(), v);
        assert_eq!(fmt_f(v), "3.0000000000000004e-1");
    }

    #[test]
    fn kernel_and_spectral_files() {
        let out = tmp("intb.csv");
        assert_eq!(dispatch(["kdvcrit", "kernel", "--k", "2", "--l", "1", "--zmin", "-5", "--zmax", "5", "--points", "11", "--out", out.to_str().unwrap()]), 0);
        let mut r = csv::Reader::from_path(&out).unwrap();
        assert_eq!(r.records().count(), 11);
        let sp = tmp("frame.csv");
        assert_eq!(dispatch(["kdvcrit", "spectral", "--L", "6.283185307179586", "--z", "-2:2:5", "--out", sp.to_str().unwrap()]), 0);
        let mut r = csv::Reader::from_path(&sp).unwrap();
        assert_eq!(r.headers().unwrap().len(), 17);
        assert_eq!(dispatch(["kdvcrit", "spectral", "--L", "1", "--z", "oops", "--out", sp.to_str().unwrap()]), 2);
        let _ = std::fs::remove_file(out);
        let _ = std::fs::remove_file(sp);
    }
}
