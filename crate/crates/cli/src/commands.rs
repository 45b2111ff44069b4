//! The five subcommands. Each turns merged settings into a [`Report`].

use std::path::Path;

use sha2::{Digest, Sha256};

use clockshift_core::search::ScanFilters;
use clockshift_core::shifts::{
    broadening, quadrupole_shift, rf_tensor_shift, tensor_polarizability_shift, BroadeningParams, FieldGeometry,
    RfField,
};
use clockshift_core::spectrum::{LowerStateModel, TransitionSpectrum};
use clockshift_core::units::{
    mt_to_tesla, quadrupole_product_hz, tesla_to_mt, HZ_PER_MHZ, KHZ_PER_MT2_PER_HZ_PER_T2,
};
use clockshift_core::{
    find_insensitive_points, scan_species, ClockTransition, FineStructureLevel, IonSpecies, SearchOptions, StateLabel,
};

use crate::report::{Cell, Report};
use crate::settings::{Command, Settings, ShiftMode};
use crate::CliError;

type Res<T> = Result<T, CliError>;

pub const DEFAULT_TRACE_POINTS: usize = 251;

/// Smallest tracked range for traces that stop at or near zero field, T.
const MIN_TRACE_RANGE: f64 = 1e-6;

pub fn execute(command: &Command, s: &Settings) -> Res<(Report, Option<CliError>)> {
    let input = Input::load(s)?;
    match command {
        Command::Trace(_) => trace(&input, s).map(|r| (r, None)),
        Command::Scan(_) => scan(&input, s),
        Command::C2(_) => c2(&input, s).map(|r| (r, None)),
        Command::Shift(_) => shift(&input, s).map(|r| (r, None)),
        Command::Broadening(_) => broadening_cmd(&input, s).map(|r| (r, None)),
    }
}

/// The species file, its digest and the selected transition.
struct Input {
    path: String,
    sha256: String,
    species: IonSpecies,
    transition_index: usize,
}

impl Input {
    fn load(s: &Settings) -> Res<Self> {
        let path = Settings::require(&s.species, "species")?;
        let bytes =
            std::fs::read(&path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
        let species = IonSpecies::load(&path)?;
        let chosen = species.transition(s.transition.as_deref())? as *const ClockTransition;
        let transition_index = species
            .transitions
            .iter()
            .position(|t| std::ptr::eq(t, chosen))
            .expect("transition comes from this species");
        Ok(Input { path: display_path(&path), sha256: hex_digest(&bytes), species, transition_index })
    }

    fn transition(&self) -> &ClockTransition {
        &self.species.transitions[self.transition_index]
    }

    fn level(&self, upper: bool) -> &FineStructureLevel {
        let t = self.transition();
        self.species.level(if upper { t.upper } else { t.lower })
    }

    fn header(&self, command: &str) -> Report {
        let mut r = Report::default();
        r.comment(format!("clockshift {}", env!("CARGO_PKG_VERSION")));
        r.comment(format!("species {} sha256={}", self.path, self.sha256));
        r.comment(format!(
            "{} {} {} -> {}, f0 = {} Hz",
            command,
            self.species.name,
            self.level(false).label,
            self.level(true).label,
            self.transition().frequency
        ));
        r
    }
}

fn display_path(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn label(s: &Option<String>, flag: &str) -> Res<StateLabel> {
    Ok(Settings::require(s, flag)?.trim().parse()?)
}

fn pair(s: &Settings) -> Res<(StateLabel, StateLabel)> {
    Ok((label(&s.lower, "lower")?, label(&s.upper, "upper")?))
}

fn lower_model(s: &Settings) -> LowerStateModel {
    if s.freeze_lower_linear.unwrap_or(false) {
        LowerStateModel::FrozenLinear
    } else {
        LowerStateModel::Exact
    }
}

fn field_mt(value: &Option<f64>, flag: &str) -> Res<f64> {
    let b = Settings::require(value, flag)?;
    if !(b.is_finite() && b >= 0.0) {
        return Err(CliError::input(format!("--{flag} must be a finite non-negative field in mT")));
    }
    Ok(b)
}

fn positive_mt(value: &Option<f64>, flag: &str) -> Res<f64> {
    let b = field_mt(value, flag)?;
    if b == 0.0 {
        return Err(CliError::input(format!("--{flag} must be positive")));
    }
    Ok(b)
}

fn with_columns(mut r: Report, columns: &[&str]) -> Report {
    r.columns = columns.iter().map(|c| c.to_string()).collect();
    r
}

fn model_note(model: LowerStateModel) -> &'static str {
    match model {
        LowerStateModel::Exact => "lower state: exact diagonalization",
        LowerStateModel::FrozenLinear => "lower state: frozen at its linear Zeeman shift",
    }
}

fn trace(input: &Input, s: &Settings) -> Res<Report> {
    let (lower, upper) = pair(s)?;
    let b_max = mt_to_tesla(field_mt(&s.bmax, "bmax")?);
    let points = s.points.unwrap_or(DEFAULT_TRACE_POINTS);
    if points == 0 {
        return Err(CliError::input("--points must be at least 1"));
    }
    let model = lower_model(s);
    let spectrum =
        TransitionSpectrum::new(&input.species, input.transition(), b_max.max(MIN_TRACE_RANGE))?.with_lower_model(model);
    let nu0 = spectrum.transition_frequency(lower, upper, 0.0)?;

    let mut r = input.header("trace");
    r.comment(format!("pair {lower} -> {upper}; {}", model_note(model)));
    r.comment(format!("delta_nu_Hz = nu(B) - nu(0); nu(0) = {nu0:?} Hz relative to f0"));
    r.comment("C2 = C2(upper) - C2(lower), dimensionless");
    let mut r = with_columns(r, &["B_mT", "delta_nu_Hz", "C2"]);
    for k in 0..points {
        let b = if points == 1 { 0.0 } else { b_max * k as f64 / (points - 1) as f64 };
        let nu = spectrum.transition_frequency(lower, upper, b)?;
        let c2 = spectrum.c2_transition(lower, upper, b)?;
        r.push(vec![tesla_to_mt(b).into(), (nu - nu0).into(), c2.into()]);
    }
    Ok(r)
}

fn scan(input: &Input, s: &Settings) -> Res<(Report, Option<CliError>)> {
    let b_max = mt_to_tesla(positive_mt(&s.bmax, "bmax")?);
    let mut opts = SearchOptions { lower_model: lower_model(s), ..SearchOptions::default() };
    if let Some(n) = s.points {
        if n < 2 {
            return Err(CliError::input("--points must be at least 2"));
        }
        opts.scan_points = n;
    }
    let filters = ScanFilters { max_abs_c2: s.max_c2, delta_m: None };
    let report = scan_species(&input.species, input.transition(), b_max, &filters, &opts)?;

    let mut r = input.header("scan");
    r.comment(format!(
        "B_max = {} mT, {} scan points, tracking {} points to {} mT; {}",
        tesla_to_mt(b_max),
        report.scan_points,
        report.tracking_points,
        tesla_to_mt(report.tracking_max),
        model_note(report.lower_model)
    ));
    if let Some(limit) = s.max_c2 {
        r.comment(format!("kept |C2| < {limit}"));
    }
    r.comment("residual_slope in Hz/T, min_gap_MHz to the nearest state with m_F +- 1");
    for f in &report.failures {
        r.comment(format!("failed {} -> {}: {}", f.lower, f.upper, f.error));
    }
    let mut r = with_columns(
        r,
        &["lower", "upper", "B0_mT", "alpha_Z_kHz_per_mT2", "C2", "min_gap_MHz", "residual_slope"],
    );
    for a in &report.analyses {
        r.push(vec![
            a.lower.to_string().into(),
            a.upper.to_string().into(),
            tesla_to_mt(a.b0).into(),
            (a.alpha_z * KHZ_PER_MT2_PER_HZ_PER_T2).into(),
            a.c2.into(),
            (a.min_gap_adjacent_mf / HZ_PER_MHZ).into(),
            a.residual_slope.into(),
        ]);
    }
    let deferred = (!report.failures.is_empty()).then(|| {
        CliError::numerical(format!(
            "{} label pair(s) failed; see the `# failed` lines of the report",
            report.failures.len()
        ))
    });
    Ok((r, deferred))
}

fn c2(input: &Input, s: &Settings) -> Res<Report> {
    let (lower, upper) = pair(s)?;
    let model = lower_model(s);
    let mut r = input.header("c2");
    r.comment(format!("pair {lower} -> {upper}; {}", model_note(model)));
    let mut r = with_columns(r, &["lower", "upper", "B_mT", "C2_lower", "C2_upper", "C2"]);
    let fields: Vec<f64> = match s.b {
        Some(_) => vec![mt_to_tesla(field_mt(&s.b, "b")?)],
        None => {
            let b_max = mt_to_tesla(positive_mt(&s.bmax, "bmax").map_err(|_| {
                CliError::input("either --b or a positive --bmax (search for insensitive points) is required")
            })?);
            let spectrum =
                TransitionSpectrum::new(&input.species, input.transition(), b_max)?.with_lower_model(model);
            let points = find_insensitive_points(&spectrum, lower, upper, b_max, &SearchOptions::default())?;
            r.comments.push(format!("{} insensitive point(s) up to {} mT", points.len(), tesla_to_mt(b_max)));
            points.iter().map(|p| p.b0).collect()
        }
    };
    let top = fields.iter().copied().fold(MIN_TRACE_RANGE, f64::max);
    let spectrum = TransitionSpectrum::new(&input.species, input.transition(), top)?.with_lower_model(model);
    for b in fields {
        let lo = spectrum.lower_state(lower, b)?.c2;
        let up = spectrum.upper_state(upper, b)?.c2;
        r.push(vec![
            lower.to_string().into(),
            upper.to_string().into(),
            tesla_to_mt(b).into(),
            lo.into(),
            up.into(),
            (up - lo).into(),
        ]);
    }
    Ok(r)
}

/// Per-level C₂ for shift evaluation: either computed at --b, or a given
/// transition value attributed to the upper level.
struct Coefficients {
    lower: f64,
    upper: f64,
    note: String,
}

fn coefficients(input: &Input, s: &Settings) -> Res<Coefficients> {
    if let Some(c2) = s.c2 {
        if !c2.is_finite() {
            return Err(CliError::input("--c2 must be finite"));
        }
        return Ok(Coefficients { lower: 0.0, upper: c2, note: "C2 given with --c2, attributed to the upper level".into() });
    }
    let (lower, upper) = pair(s).map_err(|e| {
        CliError::input(format!("{}; give --c2 or --lower/--upper with --b", e.message))
    })?;
    let b = mt_to_tesla(field_mt(&s.b, "b")?);
    let spectrum = TransitionSpectrum::new(&input.species, input.transition(), b.max(MIN_TRACE_RANGE))?
        .with_lower_model(lower_model(s));
    Ok(Coefficients {
        lower: spectrum.lower_state(lower, b)?.c2,
        upper: spectrum.upper_state(upper, b)?.c2,
        note: format!("C2 of {lower} -> {upper} at B = {} mT", tesla_to_mt(b)),
    })
}

fn degrees(value: &Option<f64>, flag: &str) -> Res<f64> {
    let deg = value.unwrap_or(0.0);
    if !deg.is_finite() {
        return Err(CliError::input(format!("--{flag} must be finite")));
    }
    Ok(deg.to_radians())
}

/// A level constant, required only when the level actually shifts.
fn constant(c2: f64, value: Res<f64>) -> Res<Option<f64>> {
    if c2 == 0.0 {
        Ok(value.ok())
    } else {
        value.map(Some)
    }
}

fn opt_cell(x: Option<f64>) -> Cell {
    x.map_or(Cell::Text(String::new()), Cell::Num)
}

fn shift(input: &Input, s: &Settings) -> Res<Report> {
    let mode = Settings::require(&s.mode, "mode")?;
    let coeffs = coefficients(input, s)?;
    let f0 = input.transition().frequency;
    let alpha = degrees(&s.alpha_deg, "alpha-deg")?;
    let beta = degrees(&s.beta_deg, "beta-deg")?;
    let epsilon = s.epsilon.unwrap_or(0.0);
    let sides = [("lower", coeffs.lower, input.level(false)), ("upper", coeffs.upper, input.level(true))];

    let mut r = input.header("shift");
    r.comment(coeffs.note.clone());
    r.comment(format!(
        "alpha = {} deg, beta = {} deg, epsilon = {epsilon}",
        s.alpha_deg.unwrap_or(0.0),
        s.beta_deg.unwrap_or(0.0)
    ));
    r.comment("transition row: upper minus lower; fractional = shift_Hz / f0");

    match mode {
        ShiftMode::Quadrupole => {
            let geom = FieldGeometry::new(alpha, beta, 1.0, epsilon)?;
            let factor = geom.quadrupole_factor();
            let mut r = with_columns(
                r,
                &["level", "C2", "geometric_factor", "gradient_product_Hz", "shift_Hz", "fractional"],
            );
            let mut total = 0.0;
            for (name, c2, level) in sides {
                let product = match (s.gradient, s.gradient_vm2) {
                    (Some(_), Some(_)) => {
                        return Err(CliError::input("give only one of --gradient and --gradient-vm2"))
                    }
                    (Some(g), None) => Some(g),
                    (None, Some(a)) => constant(
                        c2,
                        level.require_quadrupole_moment().map(|theta| quadrupole_product_hz(theta, a)).map_err(Into::into),
                    )?,
                    (None, None) => {
                        return Err(CliError::input("--gradient (Hz) or --gradient-vm2 (V/m^2) is required"))
                    }
                };
                let dv = match product {
                    Some(p) => quadrupole_shift(c2, &FieldGeometry::new(alpha, beta, p, epsilon)?),
                    None => 0.0,
                };
                total += if name == "upper" { dv } else { -dv };
                r.push(vec![name.into(), c2.into(), factor.into(), opt_cell(product), dv.into(), (dv / f0).into()]);
            }
            r.push(vec![
                "transition".into(),
                (coeffs.upper - coeffs.lower).into(),
                factor.into(),
                Cell::Text(String::new()),
                total.into(),
                (total / f0).into(),
            ]);
            Ok(r)
        }
        ShiftMode::TensorDc => {
            let (ex2, ey2, ez2) = (s.ex2.unwrap_or(0.0), s.ey2.unwrap_or(0.0), s.ez2.unwrap_or(0.0));
            let anisotropy = 2.0 * ez2 - ex2 - ey2;
            let mut r = with_columns(
                r,
                &["level", "C2", "alpha2J_au", "anisotropy_V2_per_m2", "shift_Hz", "fractional"],
            );
            let mut total = 0.0;
            for (name, c2, level) in sides {
                let a2 = constant(c2, level.require_tensor_polarizability().map_err(Into::into))?;
                let dv = a2.map_or(0.0, |a2| tensor_polarizability_shift(c2, a2, anisotropy));
                total += if name == "upper" { dv } else { -dv };
                r.push(vec![name.into(), c2.into(), opt_cell(a2), anisotropy.into(), dv.into(), (dv / f0).into()]);
            }
            r.push(vec![
                "transition".into(),
                (coeffs.upper - coeffs.lower).into(),
                Cell::Text(String::new()),
                anisotropy.into(),
                total.into(),
                (total / f0).into(),
            ]);
            Ok(r)
        }
        ShiftMode::TensorRf => {
            let rf = RfField::new(s.ex2.unwrap_or(0.0), s.ey2.unwrap_or(0.0), s.exey.unwrap_or(0.0))?;
            let geom = FieldGeometry::new(alpha, beta, 0.0, epsilon)?;
            let mut r = with_columns(
                r,
                &["level", "C2", "alpha2J_au", "isotropic_term", "anisotropic_term", "shift_Hz", "fractional"],
            );
            let mut total = 0.0;
            let mut terms = (0.0, 0.0);
            for (name, c2, level) in sides {
                let a2 = constant(c2, level.require_tensor_polarizability().map_err(Into::into))?;
                let out = rf_tensor_shift(c2, a2.unwrap_or(0.0), &rf, &geom, f0);
                terms = (out.isotropic_term, out.anisotropic_term);
                let dv = out.fractional * f0;
                total += if name == "upper" { dv } else { -dv };
                r.push(vec![
                    name.into(),
                    c2.into(),
                    opt_cell(a2),
                    out.isotropic_term.into(),
                    out.anisotropic_term.into(),
                    dv.into(),
                    out.fractional.into(),
                ]);
            }
            r.push(vec![
                "transition".into(),
                (coeffs.upper - coeffs.lower).into(),
                Cell::Text(String::new()),
                terms.0.into(),
                terms.1.into(),
                total.into(),
                (total / f0).into(),
            ]);
            Ok(r)
        }
    }
}

fn broadening_cmd(input: &Input, s: &Settings) -> Res<Report> {
    let omega_z = Settings::require(&s.omega_z, "omega-z")?;
    let n_ions = Settings::require(&s.n_ions, "n-ions")?;
    let coeffs = coefficients(input, s)?;
    let c2 = coeffs.upper - coeffs.lower;
    let params = BroadeningParams::from_species(&input.species, input.transition(), omega_z, n_ions)?;
    let out = broadening(&params, c2)?;

    let mut r = input.header("broadening");
    r.comment(coeffs.note);
    r.comment("omega_z in rad/s");
    if out.width == 0.0 {
        r.comment("C2 = 0: no broadening from this mechanism; Ramsey time unbounded");
    } else {
        r.comment("fringe contrast ~80% at a Ramsey time T = 1/delta_f");
    }
    let mut r = with_columns(r, &["C2", "N", "omega_z", "delta_f_Hz", "max_ramsey_time_s"]);
    r.push(vec![c2.into(), Cell::Int(n_ions), omega_z.into(), out.width.into(), out.max_ramsey_time.into()]);
    Ok(r)
}
