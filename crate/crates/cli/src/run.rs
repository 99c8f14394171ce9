//! Command dispatch: each command runs a fixed list of checks on a parsed
//! config and may produce text artifacts (forms, derived configs).

use std::fmt::Write as _;

use courant_core::algebroid::{ce_differential, naive_matches_ce, zero_check, AForm, AlgebroidError};
use courant_core::charclass::{
    build_from_pair, characteristic_pair_of, check_coherent, e_connection_form, find_hoist, standard_three_form,
    CharError, CharPair, Hoist, HoistVerdict,
};
use courant_core::courant::{axiom_check, validate_quintuple, Quintuple};
use courant_core::geometry::{leafwise_d, pontryagin_form, FConnection, FForm, GValuedForm};
use courant_core::morphism::{
    canned_check, central_shift, coboundary_identity_check, first_difference, hoist_shift, intertwining_check,
    omega_shift, phi_form, psi_form, transport, validate_iso, MorphismError, ShiftKind,
};
use courant_core::report::{Check, Report, Witness};
use courant_core::sample;

use crate::config::{print_config, Config, ConfigError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Axioms,
    Charform,
    Chernweil,
    Pontryagin,
    Coherent,
    Build,
    Roundtrip,
    Transport,
    Shift(ShiftKind),
    Naive,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Axioms => "axioms",
            Command::Charform => "charform",
            Command::Chernweil => "chernweil",
            Command::Pontryagin => "pontryagin",
            Command::Coherent => "coherent",
            Command::Build => "build",
            Command::Roundtrip => "roundtrip",
            Command::Transport => "transport",
            Command::Shift(_) => "shift",
            Command::Naive => "naive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flags {
    pub seed: u64,
    pub degree: u32,
}

impl Default for Flags {
    fn default() -> Self {
        Flags { seed: 0, degree: 2 }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("`{command}` needs a [{section}] section")]
    MissingSection { command: &'static str, section: &'static str },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
}

impl From<CharError> for RunError {
    fn from(e: CharError) -> Self {
        RunError::Input(e.to_string())
    }
}

impl From<MorphismError> for RunError {
    fn from(e: MorphismError) -> Self {
        RunError::Input(e.to_string())
    }
}

impl From<AlgebroidError> for RunError {
    fn from(e: AlgebroidError) -> Self {
        RunError::Input(e.to_string())
    }
}

/// A titled block of text produced by a command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub title: String,
    pub body: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Outcome {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn artifact(&mut self, title: impl Into<String>, body: String) {
        self.artifacts.push(Artifact { title: title.into(), body });
    }
}

/// Components of an `A`-form, 1-based in the combined frame (fibers first).
pub fn render_aform(w: &AForm) -> String {
    let mut out = String::new();
    for (idx, v) in w.components() {
        let ind: Vec<String> = idx.iter().map(|u| (u + 1).to_string()).collect();
        writeln!(out, "[{}] = {}", ind.join(","), v).expect("string write");
    }
    out
}

pub fn render_fform(w: &FForm) -> String {
    let mut out = String::new();
    for (idx, v) in w.components() {
        let ind: Vec<String> = idx.iter().map(|u| (u + 1).to_string()).collect();
        writeln!(out, "[{}] = {}", ind.join(","), v).expect("string write");
    }
    out
}

fn render_hoist(h: &Hoist) -> String {
    let mut out = String::new();
    for (a, v) in h.j.iter().enumerate() {
        for (k, f) in v.iter().enumerate() {
            if !f.is_zero() {
                writeln!(out, "J.{}.{} = \"{}\"", a + 1, k + 1, f).expect("string write");
            }
        }
    }
    out
}

/// `d w`, treating degrees above the rank as zero.
fn d_or_zero(q: &Quintuple, w: &AForm) -> Result<AForm, RunError> {
    match ce_differential(q, w) {
        Err(AlgebroidError::DegreeOverflow { degree, rank }) if degree > rank => {
            Ok(AForm::zero(q.n(), q.m(), q.p(), degree))
        }
        other => Ok(other?),
    }
}

fn hoist_as_form(q: &Quintuple, h: &Hoist) -> GValuedForm {
    let mut j = GValuedForm::zero(q.n(), q.p(), q.m(), 1);
    for (a, v) in h.j.iter().enumerate() {
        j.set(&[a], v.clone()).expect("in range");
    }
    j
}

pub fn run_command(cmd: Command, cfg: &Config, flags: Flags) -> Result<Outcome, RunError> {
    let q = cfg.quintuple()?;
    let mut out = Outcome::default();
    match cmd {
        Command::Check => {
            out.report = validate_quintuple(&q);
            out.report.extend(axiom_check(&q, flags.degree));
        }
        Command::Axioms => out.report = axiom_check(&q, flags.degree),
        Command::Charform => {
            let cs = standard_three_form(&q);
            out.report = zero_check("closed", &d_or_zero(&q, &cs)?);
            out.artifact("C^s", render_aform(&cs));
        }
        Command::Chernweil => chernweil(&q, cfg, flags, &mut out)?,
        Command::Pontryagin => {
            let rr = pontryagin_form(q.curv(), q.fiber());
            let residual = rr.sub(&leafwise_d(q.hform()));
            let w = residual
                .first_nonzero()
                .map(|(idx, r)| Witness::new("dF_H_equals_RR", &idx.iter().map(|a| a + 1).collect::<Vec<_>>(), r));
            out.report.push(Check::from_witness("dF_H_equals_RR", w));
            out.artifact("<R^R>", render_fform(&rr));
        }
        Command::Coherent => {
            let c = cfg.cform.as_ref().ok_or(RunError::MissingSection { command: "coherent", section: "cform" })?;
            let base = characteristic_pair_of(&q).base;
            match find_hoist(&base, c)? {
                HoistVerdict::Found(h) => {
                    out.report.push(Check::pass("find_hoist"));
                    out.report.extend(check_coherent(&base, c, &h)?);
                    out.artifact("hoist", render_hoist(&h));
                }
                HoistVerdict::NotCoherent(w) => out.report.push(Check::fail("find_hoist", w)),
            }
        }
        Command::Build => build(&q, cfg, &mut out)?,
        Command::Roundtrip => {
            let pair = characteristic_pair_of(&q);
            let back = build_from_pair(&pair, &Hoist::standard(&q))?;
            let w = (back != q).then(|| first_difference(&back, &q));
            out.report.push(Check::from_witness("roundtrip", w));
        }
        Command::Transport => {
            let iso = cfg.iso.as_ref().ok_or(RunError::MissingSection { command: "transport", section: "iso" })?;
            out.report = validate_iso(iso, q.fiber());
            if !out.report.passed() {
                return Ok(out);
            }
            let q2 = transport(&q, iso)?;
            out.report.extend(validate_quintuple(&q2));
            out.report.extend(intertwining_check(&q, &q2, iso, flags.degree)?);
            out.report.extend(coboundary_identity_check(&q, iso)?);
            out.artifact("transported config", print_config(&Config::from_quintuple(&q2)));
        }
        Command::Shift(kind) => shift(&q, cfg, kind, flags, &mut out)?,
        Command::Naive => naive(&q, cfg, flags, &mut out)?,
    }
    Ok(out)
}

fn chernweil(q: &Quintuple, cfg: &Config, flags: Flags, out: &mut Outcome) -> Result<(), RunError> {
    let cs = standard_three_form(q);
    let mut connections = vec![("zero", FConnection::zero(q.n(), q.p()))];
    if let Some(fc) = &cfg.nabla_f {
        connections.push(("nabla_f", fc.clone()));
    }
    connections.push(("seeded", sample::torsion_free(&mut sample::rng(flags.seed), q, 1)));
    for (label, fc) in connections {
        let c = e_connection_form(q, &fc)?;
        let name = format!("chern_weil_{label}");
        let w = courant_core::algebroid::form_witness(&name, &c.sub(&cs));
        out.report.push(Check::from_witness(name, w));
        out.artifact(format!("C_nabla ({label})"), render_aform(&c));
    }
    Ok(())
}

fn build(q: &Quintuple, cfg: &Config, out: &mut Outcome) -> Result<(), RunError> {
    let mut pair: CharPair = characteristic_pair_of(q);
    if let Some(c) = &cfg.cform {
        pair.c = c.clone();
    }
    let hoist = match &cfg.hoist {
        Some(h) => h.clone(),
        None => match find_hoist(&pair.base, &pair.c)? {
            HoistVerdict::Found(h) => h,
            HoistVerdict::NotCoherent(w) => {
                out.report.push(Check::fail("find_hoist", w));
                return Ok(());
            }
        },
    };
    out.report = check_coherent(&pair.base, &pair.c, &hoist)?;
    if !out.report.passed() {
        return Ok(());
    }
    let built = build_from_pair(&pair, &hoist)?;
    out.report.extend(validate_quintuple(&built));
    out.artifact("built config", print_config(&Config::from_quintuple(&built)));
    Ok(())
}

fn shift(q: &Quintuple, cfg: &Config, kind: ShiftKind, flags: Flags, out: &mut Outcome) -> Result<(), RunError> {
    let canned = match kind {
        ShiftKind::Hoist | ShiftKind::Central => {
            let h = cfg.hoist.as_ref().ok_or(RunError::MissingSection { command: "shift", section: "hoist" })?;
            let j = hoist_as_form(q, h);
            if kind == ShiftKind::Hoist {
                hoist_shift(q, &j)
            } else {
                central_shift(q, &j)
            }
        }
        ShiftKind::Omega => {
            let w = cfg.omega.as_ref().ok_or(RunError::MissingSection { command: "shift", section: "omega" })?;
            omega_shift(q, w)
        }
    };
    let canned = match canned {
        Ok(c) => c,
        Err(MorphismError::Hypothesis(w)) => {
            out.report.push(Check::fail(w.identity.clone(), w));
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    out.report = canned_check(q, &canned)?;
    out.report.extend(intertwining_check(q, &canned.target, &canned.iso, flags.degree)?);
    out.artifact("target config", print_config(&Config::from_quintuple(&canned.target)));
    Ok(())
}

fn naive(q: &Quintuple, cfg: &Config, flags: Flags, out: &mut Outcome) -> Result<(), RunError> {
    let mut forms = vec![("naive_standard".to_string(), standard_three_form(q))];
    if let Some(c) = &cfg.cform {
        forms.push(("naive_cform".to_string(), c.clone()));
    }
    let mut rng = sample::rng(flags.seed);
    forms.push(("naive_phi_j".to_string(), phi_form(q, &sample::j_form(&mut rng, q, 1))?));
    forms.push(("naive_psi_k".to_string(), psi_form(q, &sample::k_matrix(&mut rng, q, 1))?));
    for (name, w) in forms {
        out.report.push(naive_matches_ce(q, &w, &name)?);
    }
    Ok(())
}
