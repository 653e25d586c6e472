use std::fs;
use std::path::{Path, PathBuf};

use maxdiq::coupling::{dispersion_invariance_check, CouplingTable};
use maxdiq::io::{csv_string, json_string};
use maxdiq::kernels::{kernel, ode_residual, KernelKind, KernelRequest, Medium, Prefactor, Route, Sign};
use maxdiq::noise::{noise_weight_bundle, CouplingTables};
use maxdiq::scenarios::{run_scenario, Outcome as Step, ScenarioName, ScenarioSpec, Tolerances};
use maxdiq::tabulated::{OutOfRange, Tabulated};
use maxdiq::{DispersionRelation, Error, ModelKind, PhysicalConstants, Role, SusceptibilityModel};
use serde::Serialize;

use crate::args::*;

/// Why a run stopped early, mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Io(String),
    Error(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Io(_) => 74,
            Failure::Error(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Error(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Error(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<bool, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn constants(g: &GlobalArgs) -> Result<PhysicalConstants, Failure> {
    match (g.hbar, g.eps0, g.c) {
        (Some(h), Some(e), Some(c)) => Ok(PhysicalConstants::new(h, e, c)?),
        _ => Ok(match g.units {
            Units::Natural => PhysicalConstants::NATURAL,
            Units::Si => PhysicalConstants::SI,
        }),
    }
}

/// `lo:hi:n`, evenly spaced and inclusive.
pub fn parse_grid(text: &str, flag: &str) -> Result<Vec<f64>, Failure> {
    let bad = || usage(format!("{flag} expects lo:hi:n, got `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n < 2 || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(usage(format!("{flag} needs lo < hi and n >= 2, got `{text}`")));
    }
    Ok((0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect())
}

pub fn parse_dispersion(text: &str, c: f64) -> Result<DispersionRelation, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = |xs: &[&str]| -> Result<Vec<f64>, Failure> {
        xs.iter()
            .map(|x| x.parse::<f64>().map_err(|_| usage(format!("bad number `{x}` in --dispersion `{text}`"))))
            .collect()
    };
    Ok(match parts.as_slice() {
        ["linear"] => DispersionRelation::linear(c)?,
        ["power", rest @ ..] if rest.len() == 2 => {
            let v = nums(rest)?;
            DispersionRelation::power_law(v[0], v[1])?
        }
        ["poly", rest @ ..] if !rest.is_empty() => DispersionRelation::polynomial(nums(rest)?)?,
        _ => return Err(usage(format!("--dispersion expects linear, power:a:p or poly:c1:..., got `{text}`"))),
    })
}

fn need(v: Option<f64>, flag: &str, model: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| usage(format!("--model {model} needs --{flag}")))
}

fn role(r: RoleArg) -> Role {
    match r {
        RoleArg::Electric => Role::Electric,
        RoleArg::Magnetic => Role::Magnetic,
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

pub fn model(m: &ModelArgs) -> Result<SusceptibilityModel, Failure> {
    let r = role(m.role);
    let name = m.model.ok_or_else(|| usage("--model is required"))?;
    Ok(match name {
        ModelName::Vacuum => SusceptibilityModel::vacuum(r),
        ModelName::Box => SusceptibilityModel::boxcar(need(m.chi0, "chi0", "box")?, need(m.delta, "delta", "box")?, r)?,
        ModelName::Step => SusceptibilityModel::step(need(m.beta, "beta", "step")?, r)?,
        ModelName::Lorentz => SusceptibilityModel::lorentz(
            need(m.omega0, "omega0", "lorentz")?,
            need(m.gamma, "gamma", "lorentz")?,
            need(m.omegap, "omegap", "lorentz")?,
            r,
        )?,
        ModelName::Tabulated => {
            let path = m.table.as_ref().ok_or_else(|| usage("--model tabulated needs --table"))?;
            let policy = if m.strict_range { OutOfRange::Error } else { OutOfRange::Zero };
            SusceptibilityModel::tabulated(Tabulated::from_csv(read(path)?.as_bytes(), policy)?, r)?
        }
    })
}

fn compact_model(text: &str, r: Role) -> Result<SusceptibilityModel, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || usage(format!("--magnetic expects vacuum, box:chi0:delta, step:beta or lorentz:omega0:gamma:omegap, got `{text}`"));
    let v: Vec<f64> = parts[1..].iter().map(|x| x.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(match (parts[0], v.as_slice()) {
        ("vacuum", []) => SusceptibilityModel::vacuum(r),
        ("box", [c, d]) => SusceptibilityModel::boxcar(*c, *d, r)?,
        ("step", [b]) => SusceptibilityModel::step(*b, r)?,
        ("lorentz", [w, g, p]) => SusceptibilityModel::lorentz(*w, *g, *p, r)?,
        _ => return Err(bad()),
    })
}

/// The model given by the long flags fills its role; `--magnetic` fills the
/// magnetic one when the main model is electric.
pub fn medium(m: &ModelArgs) -> Result<Medium, Failure> {
    let main = model(m)?;
    let medium = match main.role {
        Role::Electric => {
            let mag = match &m.magnetic {
                Some(t) => compact_model(t, Role::Magnetic)?,
                None => SusceptibilityModel::vacuum(Role::Magnetic),
            };
            Medium::new(main, mag)?
        }
        Role::Magnetic => {
            if m.magnetic.is_some() {
                return Err(usage("--magnetic cannot be combined with --role magnetic"));
            }
            Medium::new(SusceptibilityModel::vacuum(Role::Electric), main)?
        }
    };
    Ok(medium)
}

struct Writer {
    dir: PathBuf,
}

impl Writer {
    fn new(dir: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Writer { dir: dir.to_path_buf() })
    }

    fn put(&self, name: &str, body: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
        Ok(())
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    let k = constants(&cli.global)?;
    let out = &cli.global.output_dir;
    match &cli.command {
        Command::Transform(a) => transform(a, &k, out),
        Command::Kernel(a) => kernel_cmd(a, &k, out),
        Command::Validate(a) => validate(a, &k, out),
        Command::Scenario(a) => scenario(a, &k, out),
        Command::Noise(a) => noise(a, &k, out),
    }
}

fn transform(a: &TransformArgs, k: &PhysicalConstants, out: &Path) -> Outcome {
    let dispersion = parse_dispersion(&a.dispersion, k.c())?;
    match a.direction {
        Direction::ToCoupling => {
            let m = model(&a.model)?;
            let grid = parse_grid(a.grid_omega.as_deref().ok_or_else(|| usage("transform needs --grid-omega"))?, "--grid-omega")?;
            let table = match a.route {
                CouplingRoute::Sine => {
                    if a.dispersion != "linear" {
                        return Err(usage("--route sine implies the linear dispersion; use --route im-chi for others"));
                    }
                    CouplingTable::from_model(&m, &grid, k)?
                }
                CouplingRoute::ImChi => CouplingTable::from_im_chi(&m, &grid, &dispersion, k)?,
            };
            let w = Writer::new(out)?;
            w.put(&format!("{}.csv", table.value_header()), &table.to_csv()?)?;
            if !table.clamped.is_empty() {
                eprintln!("warning: {} slightly negative values clamped to zero", table.clamped.len());
            }
            Ok(true)
        }
        Direction::ToChi => {
            let path = a.coupling_table.as_ref().ok_or_else(|| usage("--direction to-chi needs --coupling-table"))?;
            let table = CouplingTable::from_csv(read(path)?.as_bytes(), dispersion, *k)?;
            let times = parse_grid(a.grid_t.as_deref().ok_or_else(|| usage("--direction to-chi needs --grid-t"))?, "--grid-t")?;
            let est = table.chi_time_series(&times)?;
            let w = Writer::new(out)?;
            w.put(
                "chi_t.csv",
                &csv_string(&["t", "chi", "tail"], times.iter().zip(&est).map(|(&t, e)| vec![t, e.value, e.tail]))?,
            )?;
            let warned = est.iter().filter(|e| e.warning).count();
            if warned > 0 {
                eprintln!("warning: truncation tail above tolerance at {warned} times");
            }
            Ok(true)
        }
    }
}

fn request(m: &ModelArgs, p: &KernelParams, k: &PhysicalConstants) -> Result<KernelRequest, Failure> {
    let times = parse_grid(&p.grid_t, "--grid-t")?;
    let sign = match p.sign {
        SignArg::Plus => Sign::Plus,
        SignArg::Minus => Sign::Minus,
    };
    let route = match p.route {
        RouteArg::Auto => Route::Auto,
        RouteArg::Residue => Route::Residue,
        RouteArg::Contour => Route::Contour,
    };
    let prefactor = match p.prefactor.as_deref() {
        None => Prefactor::FromMedium,
        Some("unit") => Prefactor::Unit,
        Some(v) => Prefactor::Value(v.parse().map_err(|_| usage(format!("--prefactor expects a number or `unit`, got `{v}`")))?),
    };
    Ok(KernelRequest::new(medium(m)?, p.omega_q, p.omega_k, sign, times)
        .with_route(route)
        .with_prefactor(prefactor)
        .with_constants(*k))
}

fn kind(kind: KindArg) -> KernelKind {
    match kind {
        KindArg::Z => KernelKind::Z,
        KindArg::Zeta => KernelKind::Zeta,
        KindArg::Eta => KernelKind::Eta,
        KindArg::Q => KernelKind::Q,
    }
}

fn kernel_cmd(a: &KernelArgs, k: &PhysicalConstants, out: &Path) -> Outcome {
    let req = request(&a.model, &a.params, k)?;
    let series = kernel(kind(a.kind), &req)?;
    let stem = format!(
        "{}_{}",
        series.kind.as_str(),
        if series.sign == Sign::Plus { "plus" } else { "minus" }
    );
    let w = Writer::new(out)?;
    w.put(&format!("{stem}.csv"), &series.to_csv()?)?;
    w.put(&format!("{stem}.json"), &series.to_json()?)?;
    println!("method {:?}, estimated accuracy {:e}", series.method, series.accuracy);
    Ok(true)
}

#[derive(Serialize)]
struct CheckReport {
    check: &'static str,
    pass: bool,
    deviation: f64,
    tolerance: Option<f64>,
    detail: serde_json::Value,
}

fn validate(a: &ValidateArgs, k: &PhysicalConstants, out: &Path) -> Outcome {
    let report = match a.check {
        CheckName::Causality | CheckName::Passivity => {
            let m = model(&a.model)?;
            let grid = parse_grid(&a.grid_omega, "--grid-omega")?;
            let want = if a.check == CheckName::Causality {
                maxdiq::medium::Check::Causality
            } else {
                maxdiq::medium::Check::Passivity
            };
            let violations: Vec<_> = m
                .check_causality_passivity(&grid)
                .violations
                .into_iter()
                .filter(|v| v.check == want)
                .collect();
            let worst = violations.iter().map(|v| v.value.abs()).fold(0.0, f64::max);
            CheckReport {
                check: if want == maxdiq::medium::Check::Causality { "causality" } else { "passivity" },
                pass: violations.is_empty(),
                deviation: worst,
                tolerance: None,
                detail: serde_json::to_value(&violations).map_err(|e| Failure::Error(e.to_string()))?,
            }
        }
        CheckName::Kk => {
            let m = model(&a.model)?;
            let grid = parse_grid(&a.grid_omega, "--grid-omega")?;
            let omega_max = a.omega_max.unwrap_or(200.0 * grid[grid.len() - 1]);
            let skip = match m.kind {
                ModelKind::Lorentz { omega0, gamma, .. } => Some((omega0, gamma)),
                _ => None,
            };
            let mut worst: f64 = 0.0;
            let mut rows = Vec::new();
            for &w in grid.iter().filter(|&&w| w > 0.0) {
                if skip.is_some_and(|(w0, g)| (w - w0).abs() <= g) {
                    continue;
                }
                let est = m.kk_real_from_imag(w, omega_max)?;
                let exact = m.chi_freq(w)?.re;
                worst = worst.max((est.value - exact).abs());
                rows.push(vec![w, est.value, exact, est.tail]);
            }
            Writer::new(out)?.put("kk.csv", &csv_string(&["omega", "re_chi_kk", "re_chi", "tail"], rows)?)?;
            let tol = a.tolerance.unwrap_or(1e-4);
            CheckReport {
                check: "kk",
                pass: worst <= tol,
                deviation: worst,
                tolerance: Some(tol),
                detail: serde_json::json!({ "omega_max": omega_max }),
            }
        }
        CheckName::DispersionInvariance => {
            let m = model(&a.model)?;
            let grid = parse_grid(&a.grid_omega, "--grid-omega")?;
            let second = parse_dispersion(&a.dispersion, k.c())?;
            let linear = DispersionRelation::linear(k.c())?;
            let dev = dispersion_invariance_check(&m, &linear, &second, &grid, k)?;
            let tol = a.tolerance.unwrap_or(1e-12);
            CheckReport {
                check: "dispersion-invariance",
                pass: dev <= tol,
                deviation: dev,
                tolerance: Some(tol),
                detail: serde_json::json!({ "second": second.describe() }),
            }
        }
        CheckName::OdeResidual => {
            let req = request(&a.model, &a.kernel, k)?;
            let z = kernel(KernelKind::Z, &req)?;
            let r = ode_residual(&z, &req.medium, req.omega_q)?;
            let tol = a.tolerance.unwrap_or(1e-5 * req.omega_q * req.omega_q);
            CheckReport {
                check: "ode-residual",
                pass: r.max <= tol,
                deviation: r.max,
                tolerance: Some(tol),
                detail: serde_json::json!({ "at": r.at, "points_per_period": r.points_per_period }),
            }
        }
    };
    println!(
        "{}: deviation {:e}{} -> {}",
        report.check,
        report.deviation,
        report.tolerance.map(|t| format!(" (tolerance {t:e})")).unwrap_or_default(),
        if report.pass { "PASS" } else { "FAIL" }
    );
    Writer::new(out)?.put("validation.json", &json_string(&report)?)?;
    Ok(report.pass)
}

fn scenario(a: &ScenarioArgs, k: &PhysicalConstants, out: &Path) -> Outcome {
    let mut spec = match &a.spec {
        Some(path) => ScenarioSpec::from_json(&read(path)?)?,
        None => {
            let name = a.name.as_deref().unwrap_or_default();
            let name: ScenarioName = serde_json::from_value(serde_json::Value::String(name.into()))
                .map_err(|_| usage(format!("--name must be vacuum, box, step or lorentz, got `{name}`")))?;
            let mut s = ScenarioSpec::new(name);
            s.constants = *k;
            s
        }
    };
    let p = &mut spec.params;
    for (slot, v) in [
        (&mut p.omega_q, a.omega_q),
        (&mut p.omega_k, a.omega_k),
        (&mut p.beta, a.beta),
        (&mut p.chi_e0, a.chi_e0),
        (&mut p.chi_m0, a.chi_m0),
        (&mut p.delta, a.delta),
        (&mut p.omega0, a.omega0),
        (&mut p.gamma, a.gamma),
        (&mut p.omegap, a.omegap),
    ] {
        if v.is_some() {
            *slot = v;
        }
    }
    spec.grids.t_max = a.t_max.or(spec.grids.t_max);
    spec.grids.points = a.points.or(spec.grids.points);
    spec.outputs.couplings |= a.couplings;
    spec.outputs.noise |= a.noise;
    if a.abs_tolerance.is_some() || a.rel_tolerance.is_some() {
        spec.tolerances = Some(Tolerances {
            abs: a.abs_tolerance,
            rel: a.rel_tolerance,
        });
    }
    let report = run_scenario(&spec)?;
    for k in &report.kernels {
        match k {
            Step::Ok(c) => println!(
                "{}: method {:?}{}",
                c.label,
                c.series.method,
                match (c.max_abs_deviation, c.max_rel_deviation, c.pass) {
                    (Some(a), Some(r), Some(p)) =>
                        format!(", max abs deviation {a:e}, rel {r:e} -> {}", if p { "PASS" } else { "FAIL" }),
                    _ => ", no closed form".into(),
                }
            ),
            Step::Skipped(m) => println!("skipped: {m}"),
            Step::Failed(m) => println!("failed: {m}"),
        }
    }
    report.write(out)?;
    println!("scenario {}: {}", report.name.as_str(), if report.pass { "PASS" } else { "FAIL" });
    Ok(report.pass)
}

fn noise(a: &NoiseArgs, k: &PhysicalConstants, out: &Path) -> Outcome {
    let medium = medium(&a.model)?;
    let grid = parse_grid(&a.grid_omega, "--grid-omega")?;
    if grid[0] <= 0.0 {
        return Err(usage("noise weights need a grid with lo > 0"));
    }
    let electric = match &a.coupling_table {
        Some(path) => {
            let d = parse_dispersion(&a.dispersion, k.c())?;
            Some(CouplingTable::from_csv(read(path)?.as_bytes(), d, *k)?)
        }
        None => None,
    };
    let bundle = noise_weight_bundle(&medium, &CouplingTables { electric, magnetic: None }, &grid, k)?;
    Writer::new(out)?.put("noise.csv", &bundle.to_csv()?)?;
    println!("max table/model mismatch {:e}", bundle.max_mismatch);
    Ok(true)
}
