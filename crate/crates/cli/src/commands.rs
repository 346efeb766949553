//! Subcommand implementations. Each writes its artifacts plus a config
//! snapshot and a `<command>.manifest.json` listing them.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use soc_sta::grid::{density_profile, evolve, init_basis_state, GridRunReport, SpatialGrid, Spin};
use soc_sta::morse::MatrixElements;
use soc_sta::pulse::{
    design, design_scheme1, design_scheme2, design_scheme2_interacting, Interactions, PulseSchedule, Scheme,
    TransferSpec,
};
use soc_sta::robustness::{scan_noise, scan_systematic, stochastic_oracle, ScanEngine, ScanResult};
use soc_sta::two_level::{propagate_nonlinear, Trajectory};
use soc_sta::validation::{run_all, run_criterion, CriterionReport};
use soc_sta::Error;

use crate::config::RunConfig;
use crate::output::{column, format_number as num, Artifacts, ResultManifest};
use crate::{CliError, Engine, Figure, ScanKind};

type Scalars = BTreeMap<String, f64>;

/// Scan points may fail individually; below this success rate the command fails.
const MIN_SCAN_SUCCESS: f64 = 0.9;

fn failure(reason: String) -> Error {
    Error::NumericalFailure {
        time: 0.0,
        step: None,
        reason,
    }
}

pub struct Context {
    pub cfg: RunConfig,
    started: Instant,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Self {
        Self {
            cfg,
            started: Instant::now(),
        }
    }

    fn artifacts(&self) -> Result<Artifacts, CliError> {
        Artifacts::new(&self.cfg.out_dir)
    }

    fn finish(&self, command: &str, mut art: Artifacts, scalars: Scalars) -> Result<ResultManifest, CliError> {
        if let Some((k, _)) = scalars.iter().find(|(_, v)| !v.is_finite()) {
            return Err(failure(format!("scalar {k} is not finite")).into());
        }
        art.write_text("config_snapshot.txt", &self.cfg.snapshot())?;
        let name = format!("{}.manifest.json", command.replace(' ', "_"));
        let mut artifacts = art.files().to_vec();
        artifacts.push(name.clone());
        let manifest = ResultManifest {
            command: command.to_string(),
            toolkit_version: env!("CARGO_PKG_VERSION"),
            config: self.cfg.snapshot_map(),
            artifacts,
            scalars,
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
        };
        art.write_json(&name, &manifest)?;
        Ok(manifest)
    }
}

fn schedule_for(cfg: &RunConfig) -> Result<(PulseSchedule, MatrixElements), CliError> {
    let spec = cfg.transfer_spec()?;
    let me = spec.matrix_elements()?;
    Ok((design(&spec, &me, cfg.sample_count)?, me))
}

/// Effective g felt by the atoms in two-level runs.
fn atom_interactions(cfg: &RunConfig) -> Result<Interactions, CliError> {
    if cfg.is_interacting() {
        Ok(cfg.effective_interactions()?)
    } else {
        Ok(Interactions::default())
    }
}

pub fn inspect(ctx: &Context) -> Result<ResultManifest, CliError> {
    #[derive(Serialize)]
    struct Inspect {
        depth: f64,
        eta: f64,
        bound_count: usize,
        energies: Vec<f64>,
        characteristic_length: f64,
        position_moments: Vec<f64>,
        q: BTreeMap<String, f64>,
        matrix_elements: MatrixJson,
        gap: f64,
        effective_interactions: Interactions,
        warnings: Vec<String>,
    }
    let cfg = &ctx.cfg;
    let morse = cfg.morse()?;
    let spec = cfg.transfer_spec()?;
    let me = spec.matrix_elements()?;
    let energies = (0..morse.bound_count())
        .map(|k| morse.energy(k))
        .collect::<Result<Vec<_>, _>>()?;
    let moments = (0..morse.bound_count())
        .map(|k| morse.position_moment(k))
        .collect::<Result<Vec<_>, _>>()?;
    let (n, l) = (spec.n, spec.l);
    let mut q = BTreeMap::new();
    let (qnn, qll, qnl) = (morse.overlap_q(n, n)?, morse.overlap_q(l, l)?, morse.overlap_q(n, l)?);
    q.insert(format!("Q({n},{n})"), qnn);
    q.insert(format!("Q({l},{l})"), qll);
    q.insert(format!("Q({n},{l})"), qnl);
    let info = Inspect {
        depth: morse.depth(),
        eta: morse.eta(),
        bound_count: morse.bound_count(),
        energies: energies.clone(),
        characteristic_length: morse.characteristic_length(),
        position_moments: moments,
        q,
        matrix_elements: MatrixJson::from(&me),
        gap: spec.gap(),
        effective_interactions: cfg.effective_interactions()?,
        warnings: spec.warnings(),
    };
    println!(
        "Morse depth {} (eta = {}), {} bound states",
        info.depth, info.eta, info.bound_count
    );
    for (k, e) in energies.iter().enumerate() {
        println!("  E{k} = {}", num(*e));
    }
    println!(
        "|G| = {:.6}, |M| = {:.6}, |S| = {:.6}",
        me.g.norm(),
        me.coupling.norm(),
        me.spin_overlap().norm()
    );
    println!("Q ratios: {:.4}, {:.4}", qnn / qll, qnl / (qnn + qll));
    println!("gap = {}", num(spec.gap()));
    for w in &info.warnings {
        println!("warning: {w}");
    }
    let mut art = ctx.artifacts()?;
    art.write_json("inspect.json", &info)?;
    let mut scalars = Scalars::new();
    scalars.insert("gap".into(), spec.gap());
    scalars.insert("abs_g".into(), me.g.norm());
    scalars.insert("abs_m".into(), me.coupling.norm());
    scalars.insert("q_ratio_diag".into(), qnn / qll);
    scalars.insert("q_ratio_cross".into(), qnl / (qnn + qll));
    ctx.finish("inspect", art, scalars)
}

#[derive(Serialize)]
struct Complex {
    re: f64,
    im: f64,
    abs: f64,
    arg: f64,
}

impl From<Complex64> for Complex {
    fn from(c: Complex64) -> Self {
        Self {
            re: c.re,
            im: c.im,
            abs: c.norm(),
            arg: c.arg(),
        }
    }
}

#[derive(Serialize)]
struct MatrixJson {
    n: usize,
    l: usize,
    alpha: f64,
    g: Complex,
    k: Complex,
    coupling: Complex,
    spin_overlap: Complex,
    x_diag_n: f64,
    x_diag_l: f64,
}

impl From<&MatrixElements> for MatrixJson {
    fn from(me: &MatrixElements) -> Self {
        Self {
            n: me.n,
            l: me.l,
            alpha: me.alpha,
            g: me.g.into(),
            k: me.k.into(),
            coupling: me.coupling.into(),
            spin_overlap: me.spin_overlap().into(),
            x_diag_n: me.x_diag_n,
            x_diag_l: me.x_diag_l,
        }
    }
}

#[derive(Serialize)]
struct Endpoints {
    channel_a_start: f64,
    channel_a_end: f64,
    channel_b_start: f64,
    channel_b_end: f64,
}

#[derive(Serialize)]
struct ScheduleSidecar<'a> {
    scheme: Scheme,
    channel_a: &'static str,
    channel_b: &'static str,
    spec: &'a TransferSpec,
    coupling: Complex,
    gap: f64,
    level_spacing: f64,
    endpoints: Endpoints,
    max_abs_channel_a: f64,
    sample_count: usize,
    warnings: &'a [String],
}

fn schedule_rows(s: &PulseSchedule) -> Vec<Vec<f64>> {
    (0..s.len())
        .map(|i| vec![s.times[i], s.channel_a[i], s.channel_b[i]])
        .collect()
}

pub fn design_cmd(ctx: &Context) -> Result<ResultManifest, CliError> {
    let (s, _) = schedule_for(&ctx.cfg)?;
    let last = s.len() - 1;
    let (la, lb) = s.labels();
    let endpoints = Endpoints {
        channel_a_start: s.channel_a[0],
        channel_a_end: s.channel_a[last],
        channel_b_start: s.channel_b[0],
        channel_b_end: s.channel_b[last],
    };
    println!("scheme {}: gap = {}", s.spec.scheme, num(s.spec.gap()));
    println!(
        "  {la}(0) = {}, {la}(t_f) = {}",
        num(endpoints.channel_a_start),
        num(endpoints.channel_a_end)
    );
    println!(
        "  {lb}(0) = {}, {lb}(t_f) = {}",
        num(endpoints.channel_b_start),
        num(endpoints.channel_b_end)
    );
    for w in &s.warnings {
        println!("warning: {w}");
    }
    let mut scalars = Scalars::new();
    scalars.insert("gap".into(), s.spec.gap());
    scalars.insert("channel_b_start".into(), endpoints.channel_b_start);
    scalars.insert("channel_b_end".into(), endpoints.channel_b_end);
    scalars.insert("max_abs_channel_a".into(), s.max_abs_channel_a());
    let sidecar = ScheduleSidecar {
        scheme: s.spec.scheme,
        channel_a: la,
        channel_b: lb,
        spec: &s.spec,
        coupling: s.coupling.into(),
        gap: s.spec.gap(),
        level_spacing: s.spec.level_spacing(),
        endpoints,
        max_abs_channel_a: s.max_abs_channel_a(),
        sample_count: s.len(),
        warnings: &s.warnings,
    };
    let mut art = ctx.artifacts()?;
    art.write_csv("schedule.csv", "t,channel_a,channel_b", &schedule_rows(&s))?;
    art.write_json("schedule.json", &sidecar)?;
    ctx.finish("design", art, scalars)
}

fn run_two_level(cfg: &RunConfig, s: &PulseSchedule, me: &MatrixElements) -> Result<Trajectory, CliError> {
    Ok(propagate_nonlinear(
        s,
        me,
        &atom_interactions(cfg)?,
        &cfg.two_level_settings(),
    )?)
}

fn run_grid(
    cfg: &RunConfig,
    s: &PulseSchedule,
) -> Result<(SpatialGrid, soc_sta::grid::SpinorField, GridRunReport), CliError> {
    let grid = cfg.grid()?;
    let spec = &s.spec;
    let psi0 = init_basis_state(&grid, &spec.morse, spec.n, Spin::Up, spec.alpha)?;
    let (psi, report) = evolve(&psi0, &grid, s, &cfg.grid_settings()?)?;
    Ok((grid, psi, report))
}

fn density_rows(
    s: &PulseSchedule,
    grid: &SpatialGrid,
    psi: &soc_sta::grid::SpinorField,
) -> Result<(Vec<Vec<f64>>, f64), CliError> {
    let spec = &s.spec;
    let target = init_basis_state(grid, &spec.morse, spec.l, Spin::Down, spec.alpha)?;
    let d = density_profile(psi, grid);
    let t = density_profile(&target, grid);
    let rows = (0..d.x.len())
        .map(|i| vec![d.x[i], d.up[i], d.down[i], t.down[i]])
        .collect();
    Ok((rows, d.l1_distance(&t)))
}

pub fn simulate(ctx: &Context, engine: Engine) -> Result<ResultManifest, CliError> {
    let cfg = &ctx.cfg;
    let (s, me) = schedule_for(cfg)?;
    let mut art = ctx.artifacts()?;
    let mut scalars = Scalars::new();
    scalars.insert("gap".into(), s.spec.gap());
    scalars.insert("max_abs_channel_a".into(), s.max_abs_channel_a());
    match engine {
        Engine::Twolevel => {
            let traj = run_two_level(cfg, &s, &me)?;
            scalars.insert("final_fidelity".into(), traj.final_fidelity());
            scalars.insert("final_pz".into(), *traj.pz.last().expect("nonempty"));
            scalars.insert("max_norm_drift".into(), traj.max_norm_drift());
            art.write_csv("trajectory.csv", Trajectory::csv_header(), &traj.csv_rows())?;
        }
        Engine::Grid => {
            let (grid, psi, report) = run_grid(cfg, &s)?;
            let (rows, l1) = density_rows(&s, &grid, &psi)?;
            scalars.insert("final_fidelity".into(), report.final_fidelity);
            scalars.insert("initial_pz".into(), report.pz[0]);
            scalars.insert("final_pz".into(), *report.pz.last().expect("nonempty"));
            scalars.insert("max_norm_drift".into(), report.max_norm_drift());
            scalars.insert("max_abs_theta1_applied".into(), report.max_abs_theta1);
            scalars.insert("density_l1_distance".into(), l1);
            art.write_csv("grid_report.csv", GridRunReport::csv_header(), &report.csv_rows())?;
            art.write_csv("density.csv", "x,dens_up,dens_down,dens_target", &rows)?;
        }
    }
    #[derive(Serialize)]
    struct Report<'a> {
        engine: &'static str,
        scheme: Scheme,
        scalars: &'a Scalars,
        warnings: &'a [String],
    }
    let report = Report {
        engine: engine.name(),
        scheme: s.spec.scheme,
        scalars: &scalars,
        warnings: &s.warnings,
    };
    art.write_json("report.json", &report)?;
    println!(
        "{} engine: final fidelity {:.6}",
        engine.name(),
        scalars["final_fidelity"]
    );
    ctx.finish("simulate", art, scalars)
}

/// Noninteracting and (when configured) interacting direction-tuned designs.
fn scan_schedules(cfg: &RunConfig) -> Result<Vec<(&'static str, PulseSchedule, MatrixElements)>, CliError> {
    if !cfg.scheme.is_so_direction() {
        return Err(
            Error::Config("scans need transfer.scheme = so_direction or so_direction_interacting".into()).into(),
        );
    }
    let base = cfg.transfer_spec()?.with_interactions(Interactions::default());
    let me = base.matrix_elements()?;
    let mut out = vec![("", design_scheme2(&base, &me, cfg.sample_count)?, me)];
    if cfg.is_interacting() {
        let spec = base.with_interactions(cfg.effective_interactions()?);
        out.push((
            "_interacting",
            design_scheme2_interacting(&spec, &me, cfg.sample_count)?,
            me,
        ));
    }
    Ok(out)
}

fn check_scan(scan: &ScanResult, failed: &mut Vec<String>) {
    if scan.success_fraction() < MIN_SCAN_SUCCESS {
        failed.push(format!(
            "{} scan: only {:.0}% of points succeeded",
            scan.parameter,
            100.0 * scan.success_fraction()
        ));
    }
}

pub fn scan(ctx: &Context, kind: ScanKind, engine: Engine) -> Result<ResultManifest, CliError> {
    let cfg = &ctx.cfg;
    let schedules = scan_schedules(cfg)?;
    let mut art = ctx.artifacts()?;
    let mut scalars = Scalars::new();
    let mut failed = Vec::new();
    let mut results = Vec::new();
    let name = match kind {
        ScanKind::Systematic => "scan_systematic",
        ScanKind::Noise => "scan_noise",
    };
    for (suffix, s, me) in &schedules {
        let mut scan = match kind {
            ScanKind::Systematic => {
                let engine = match engine {
                    Engine::Twolevel => ScanEngine::TwoLevel(cfg.two_level_settings()),
                    Engine::Grid => {
                        let mut settings = cfg.grid_settings()?;
                        if suffix.is_empty() {
                            settings.couplings = Default::default();
                        }
                        ScanEngine::Grid(cfg.grid()?, settings)
                    }
                };
                scan_systematic(s, me, &cfg.lambdas, &engine)?
            }
            ScanKind::Noise => {
                if engine == Engine::Grid {
                    return Err(Error::Config("noise scans run on the two-level master equation only".into()).into());
                }
                scan_noise(s, &cfg.lambda_primes, &cfg.two_level_settings())?
            }
        };
        check_scan(&scan, &mut failed);
        let fid = column(&scan.fidelity);
        let file = format!("{name}{suffix}.csv");
        match kind {
            ScanKind::Systematic => {
                let rows: Vec<Vec<f64>> = scan.values.iter().zip(&fid).map(|(x, f)| vec![*x, *f]).collect();
                art.write_csv(&file, "lambda,fidelity", &rows)?;
                if let Some(f0) = scan.fidelity_at(0.0) {
                    scalars.insert(format!("fidelity_at_zero{suffix}"), f0);
                }
                if let Some([_, _, c]) = scan.quadratic_fit() {
                    scalars.insert(format!("curvature{suffix}"), 2.0 * c);
                }
            }
            ScanKind::Noise if cfg.trajectories > 0 => {
                scan.seed = Some(cfg.seed);
                let mut rows = Vec::with_capacity(scan.values.len());
                for (lp, f) in scan.values.iter().zip(&fid) {
                    let est = stochastic_oracle(s, *lp, cfg.trajectories, cfg.seed, cfg.noise_dt)?;
                    rows.push(vec![*lp, *f, est.fidelity, est.stderr]);
                }
                let worst = rows.iter().map(|r| (r[2] - r[1]).abs()).fold(0.0, f64::max);
                scalars.insert(format!("max_oracle_discrepancy{suffix}"), worst);
                art.write_csv(&file, "lambda_prime,fidelity,stochastic_fidelity,stderr", &rows)?;
            }
            ScanKind::Noise => {
                let rows: Vec<Vec<f64>> = scan.values.iter().zip(&fid).map(|(x, f)| vec![*x, *f]).collect();
                art.write_csv(&file, "lambda_prime,fidelity", &rows)?;
            }
        }
        if let ScanKind::Noise = kind {
            if let Some(f) = scan.fidelity.last().copied().flatten() {
                scalars.insert(format!("fidelity_at_max{suffix}"), f);
            }
        }
        results.push(scan);
    }
    art.write_json(&format!("{name}.json"), &results)?;
    let manifest = ctx.finish(&name.replace('_', " "), art, scalars)?;
    if !failed.is_empty() {
        return Err(CliError::Scan(failed.join("; ")));
    }
    Ok(manifest)
}

fn canonical(scheme: Scheme) -> RunConfig {
    RunConfig {
        scheme,
        ..RunConfig::default()
    }
}

pub fn reproduce(ctx: &Context, figure: Figure) -> Result<ResultManifest, CliError> {
    let mut art = ctx.artifacts()?;
    let mut scalars = Scalars::new();
    match figure {
        Figure::Fig2 => {
            let base = canonical(Scheme::Raman).transfer_spec()?;
            let alphas = [0.8, 1.2, 1.6, 2.0];
            let designs = alphas
                .iter()
                .map(|&a| {
                    let spec = base.with_alpha(a);
                    design_scheme1(&spec, &spec.matrix_elements()?, RunConfig::default().sample_count)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let spread = designs
                .iter()
                .flat_map(|d| {
                    d.channel_b
                        .iter()
                        .zip(&designs[0].channel_b)
                        .map(|(a, b)| (a - b).abs())
                })
                .fold(0.0, f64::max);
            if spread > 1e-10 {
                return Err(failure(format!("detuning depends on alpha (spread {spread:e})")).into());
            }
            let t = &designs[0].times;
            let omega: Vec<Vec<f64>> = (0..t.len())
                .map(|i| {
                    std::iter::once(t[i])
                        .chain(designs.iter().map(|d| d.channel_a[i]))
                        .collect()
                })
                .collect();
            let delta: Vec<Vec<f64>> = (0..t.len()).map(|i| vec![t[i], designs[0].channel_b[i]]).collect();
            art.write_csv(
                "fig2a.csv",
                "t,omega_alpha_0.8,omega_alpha_1.2,omega_alpha_1.6,omega_alpha_2",
                &omega,
            )?;
            art.write_csv("fig2b.csv", "t,delta", &delta)?;
            scalars.insert("delta_alpha_spread".into(), spread);
        }
        Figure::Fig3 | Figure::Fig4 => {
            let cfg = canonical(Scheme::Raman);
            let (s, me) = schedule_for(&cfg)?;
            let traj = run_two_level(&cfg, &s, &me)?;
            let (_, _, report) = run_grid(&cfg, &s)?;
            let lc = s.spec.morse.characteristic_length();
            let step = cfg.two_level_dt;
            let rows: Vec<Vec<f64>> = report
                .times
                .iter()
                .enumerate()
                .map(|(j, &t)| {
                    let i = ((t / step).round() as usize).min(traj.times.len() - 1);
                    if figure == Figure::Fig3 {
                        vec![t, traj.x_expect_over_lc[i], report.x_expect[j] / lc]
                    } else {
                        vec![
                            t,
                            traj.px[i],
                            traj.py[i],
                            traj.pz[i],
                            report.px[j],
                            report.py[j],
                            report.pz[j],
                        ]
                    }
                })
                .collect();
            if figure == Figure::Fig3 {
                art.write_csv("fig3.csv", "t,x_over_lc_twolevel,x_over_lc_grid", &rows)?;
                scalars.insert("x_over_lc_start".into(), traj.x_expect_over_lc[0]);
                scalars.insert("x_over_lc_end".into(), *traj.x_expect_over_lc.last().expect("nonempty"));
            } else {
                art.write_csv("fig4.csv", "t,Px,Py,Pz,Px_grid,Py_grid,Pz_grid", &rows)?;
                scalars.insert("pz_end".into(), *traj.pz.last().expect("nonempty"));
                scalars.insert("pz_grid_end".into(), *report.pz.last().expect("nonempty"));
            }
            scalars.insert("grid_fidelity".into(), report.final_fidelity);
        }
        Figure::Fig6 => {
            for (panel, c) in [("a", 0.1), ("b", 1.5)] {
                let cfg = RunConfig {
                    c,
                    ..canonical(Scheme::Raman)
                };
                let (s, _) = schedule_for(&cfg)?;
                let (grid, psi, report) = run_grid(&cfg, &s)?;
                let (rows, l1) = density_rows(&s, &grid, &psi)?;
                art.write_csv(&format!("fig6{panel}.csv"), "x,dens_up,dens_down,dens_target", &rows)?;
                scalars.insert(format!("fidelity_c{c}"), report.final_fidelity);
                scalars.insert(format!("l1_distance_c{c}"), l1);
            }
        }
        Figure::Fig7 => {
            let plain = canonical(Scheme::SoDirection);
            let inter = canonical(Scheme::SoDirectionInteracting);
            let (a, _) = schedule_for(&plain)?;
            let (b, _) = schedule_for(&inter)?;
            let theta: Vec<Vec<f64>> = (0..a.len())
                .map(|i| vec![a.times[i], a.channel_a[i], b.channel_a[i]])
                .collect();
            let beta: Vec<Vec<f64>> = (0..a.len())
                .map(|i| vec![a.times[i], a.channel_b[i], b.channel_b[i]])
                .collect();
            art.write_csv("fig7a.csv", "t,theta1,theta1_interacting", &theta)?;
            art.write_csv("fig7b.csv", "t,beta,beta_interacting", &beta)?;
            scalars.insert("max_abs_theta1".into(), a.max_abs_channel_a());
            scalars.insert("beta_shift_start".into(), b.channel_b[0] - a.channel_b[0]);
            scalars.insert(
                "beta_shift_end".into(),
                b.channel_b[b.len() - 1] - a.channel_b[a.len() - 1],
            );
        }
        Figure::Fig8 | Figure::Fig9 => {
            let cfg = canonical(Scheme::SoDirectionInteracting);
            let schedules = scan_schedules(&cfg)?;
            let scans = schedules
                .iter()
                .map(|(_, s, me)| {
                    if figure == Figure::Fig8 {
                        scan_systematic(s, me, &cfg.lambdas, &ScanEngine::TwoLevel(cfg.two_level_settings()))
                    } else {
                        scan_noise(s, &cfg.lambda_primes, &cfg.two_level_settings())
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            let (a, b) = (column(&scans[0].fidelity), column(&scans[1].fidelity));
            let rows: Vec<Vec<f64>> = scans[0]
                .values
                .iter()
                .enumerate()
                .map(|(i, x)| vec![*x, a[i], b[i]])
                .collect();
            if figure == Figure::Fig8 {
                art.write_csv("fig8.csv", "lambda,fidelity_noninteracting,fidelity_interacting", &rows)?;
            } else {
                art.write_csv(
                    "fig9.csv",
                    "lambda_prime,fidelity_noninteracting,fidelity_interacting",
                    &rows,
                )?;
            }
            scalars.insert("fidelity_noninteracting_last".into(), *a.last().expect("nonempty"));
            scalars.insert("fidelity_interacting_last".into(), *b.last().expect("nonempty"));
        }
    }
    ctx.finish(&format!("reproduce {}", figure.name()), art, scalars)
}

pub fn validate(ctx: &Context, criterion: Option<u8>) -> Result<ResultManifest, CliError> {
    let reports: Vec<CriterionReport> = match criterion {
        Some(id) => {
            if !(1..=10).contains(&id) {
                return Err(Error::Config(format!("criterion must be 1..=10, got {id}")).into());
            }
            vec![run_criterion(id)]
        }
        None => run_all(),
    };
    for r in &reports {
        print!("{r}");
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    println!("{passed}/{} criteria passed", reports.len());
    let mut art = ctx.artifacts()?;
    art.write_json("validation.json", &reports)?;
    let mut scalars = Scalars::new();
    scalars.insert("criteria_passed".into(), passed as f64);
    scalars.insert("criteria_run".into(), reports.len() as f64);
    let manifest = ctx.finish("validate", art, scalars)?;
    if passed < reports.len() {
        let failed: Vec<String> = reports
            .iter()
            .filter(|r| !r.passed())
            .map(|r| r.id.to_string())
            .collect();
        return Err(CliError::Validation(failed.join(", ")));
    }
    Ok(manifest)
}
