use serde::{Deserialize, Serialize};

use super::series::DiagnosticSeries;
use crate::dynamics::{interaction_field, Observer, ObserverState, Sample, Trajectory};
use crate::phase::{CutoffSpec, Profile};
use crate::spectral::{free_propagate, ComplexField, Rep};
use crate::{Error, Result};

/// The propagation observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LedgerKind {
    /// `B = F₁ F_c F₁`
    F1FcF1,
    /// `B̃ = F_c F₁ F_c`
    FcF1Fc,
}

impl LedgerKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "f1fcf1" => Some(LedgerKind::F1FcF1),
            "fcf1fc" => Some(LedgerKind::FcF1Fc),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LedgerKind::F1FcF1 => "f1fcf1",
            LedgerKind::FcF1Fc => "fcf1fc",
        }
    }
}

/// `d⟨B⟩/dt = c₁ + c₂ + g_interaction + g_remainder` at one time.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerTerms {
    pub expectation: f64,
    pub c1: f64,
    pub c2: f64,
    pub g_interaction: f64,
    pub g_remainder: f64,
}

impl LedgerTerms {
    pub fn g(&self) -> f64 {
        self.g_interaction + self.g_remainder
    }

    pub fn derivative(&self) -> f64 {
        self.c1 + self.c2 + self.g()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub t: f64,
    pub terms: LedgerTerms,
    pub int_c1: f64,
    pub int_c2: f64,
    pub int_g: f64,
    /// `∫|g|`
    pub int_abs_g: f64,
    /// `|⟨B(t)⟩ − ⟨B(1)⟩ − ∫(c₁ + c₂ + g)|`
    pub defect: f64,
}

fn sum_weighted(w: &[f64], f: &ComplexField) -> f64 {
    w.iter().zip(f.samples()).map(|(w, z)| w * z.norm_sqr()).sum::<f64>() * f.measure()
}

/// The ledger terms at `t` for the interaction-picture state `φ = e^{i(t−1)H₀}ψ(t)`
/// and `χ = e^{i(t−1)H₀}𝒩ψ(t)`.
pub fn ledger_terms(
    kind: LedgerKind,
    phi: &ComplexField,
    chi: &ComplexField,
    t: f64,
    alpha: f64,
    b: f64,
) -> Result<LedgerTerms> {
    phi.expect_same_grid(chi)?;
    let grid = *phi.grid();
    let fc = CutoffSpec::spatial_inner(alpha);
    let f1 = CutoffSpec::spectral_outer(b);
    let pc = fc.profile(&grid, t)?;
    let dpc = fc.time_derivative(&grid, t)?;
    let p1 = f1.profile(&grid, t)?;
    let dp1 = f1.time_derivative(&grid, t)?;
    let phi_x = phi.to_rep(Rep::Position);
    let phi_q = phi.to_rep(Rep::Spectrum);
    let chi_q = chi.to_rep(Rep::Spectrum);
    let root = |p: &Profile| p.sqrt();
    Ok(match kind {
        LedgerKind::F1FcF1 => {
            let u = phi_q.clone().mul_real(&p1.values).into_position();
            let expectation = sum_weighted(&pc.values, &u);
            let c1 = sum_weighted(&dpc.values, &u);
            let v = root(&pc).apply(&phi_x).into_spectrum();
            let f1df1: Vec<f64> = p1.values.iter().zip(&dp1.values).map(|(a, b)| a * b).collect();
            let c2 = 2.0 * sum_weighted(&f1df1, &v);
            let fcu = u.clone().mul_real(&pc.values).into_spectrum();
            let r = phi_q.inner(&fcu.mul_real(&dp1.values))?;
            let g_remainder = 2.0 * (r.re - 0.5 * c2);
            let w = chi_q.mul_real(&p1.values).into_position();
            let g_interaction = 2.0 * u.mul_real(&pc.values).inner(&w)?.im;
            LedgerTerms { expectation, c1, c2, g_interaction, g_remainder }
        }
        LedgerKind::FcF1Fc => {
            let a = phi_x.clone().mul_real(&pc.values).into_spectrum();
            let expectation = sum_weighted(&p1.values, &a);
            let c1 = sum_weighted(&dp1.values, &a);
            let y = root(&p1).apply(&phi_q).into_position();
            let fcdfc: Vec<f64> = pc.values.iter().zip(&dpc.values).map(|(a, b)| a * b).collect();
            let c2 = 2.0 * sum_weighted(&fcdfc, &y);
            let f1a = a.mul_real(&p1.values);
            let tau = phi_x.inner(&f1a.to_rep(Rep::Position).mul_real(&dpc.values))?;
            let g_remainder = 2.0 * (tau.re - 0.5 * c2);
            let fchi = pc.apply(&chi_q);
            let g_interaction = 2.0 * f1a.inner(&fchi)?.im;
            LedgerTerms { expectation, c1, c2, g_interaction, g_remainder }
        }
    })
}

/// Ledger terms straight from `ψ(t)` and the interaction.
pub fn ledger_terms_at(
    kind: LedgerKind,
    psi: &ComplexField,
    n_psi: &ComplexField,
    t: f64,
    alpha: f64,
    b: f64,
) -> Result<LedgerTerms> {
    let phi = free_propagate(psi, -(t - 1.0))?;
    let chi = free_propagate(n_psi, -(t - 1.0))?;
    ledger_terms(kind, &phi, &chi, t, alpha, b)
}

/// Trapezoid integration of the ledger terms over successive samples.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LedgerAccumulator {
    pub records: Vec<LedgerRecord>,
}

impl LedgerAccumulator {
    pub fn push(&mut self, t: f64, terms: LedgerTerms) -> Result<&LedgerRecord> {
        let rec = match self.records.last() {
            None => LedgerRecord { t, terms, ..Default::default() },
            Some(p) => {
                if !(t > p.t) {
                    return Err(Error::param(format!("ledger time {t} does not follow {}", p.t)));
                }
                let h = 0.5 * (t - p.t);
                let q = &p.terms;
                let int_c1 = p.int_c1 + h * (q.c1 + terms.c1);
                let int_c2 = p.int_c2 + h * (q.c2 + terms.c2);
                let int_g = p.int_g + h * (q.g() + terms.g());
                let int_abs_g = p.int_abs_g + h * (q.g().abs() + terms.g().abs());
                let b0 = self.records[0].terms.expectation;
                let defect = (terms.expectation - b0 - int_c1 - int_c2 - int_g).abs();
                LedgerRecord { t, terms, int_c1, int_c2, int_g, int_abs_g, defect }
            }
        };
        self.records.push(rec);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn summary(&self) -> LedgerSummary {
        summarize(&self.records)
    }

    const COLUMNS: [&'static str; 11] = [
        "t", "expectation", "c1", "c2", "g_interaction", "g_remainder", "int_c1", "int_c2", "int_g",
        "int_abs_g", "defect",
    ];

    fn columns(&self) -> Vec<Vec<f64>> {
        let r = &self.records;
        vec![
            r.iter().map(|r| r.t).collect(),
            r.iter().map(|r| r.terms.expectation).collect(),
            r.iter().map(|r| r.terms.c1).collect(),
            r.iter().map(|r| r.terms.c2).collect(),
            r.iter().map(|r| r.terms.g_interaction).collect(),
            r.iter().map(|r| r.terms.g_remainder).collect(),
            r.iter().map(|r| r.int_c1).collect(),
            r.iter().map(|r| r.int_c2).collect(),
            r.iter().map(|r| r.int_g).collect(),
            r.iter().map(|r| r.int_abs_g).collect(),
            r.iter().map(|r| r.defect).collect(),
        ]
    }

    fn from_columns(cols: &[&[f64]]) -> Result<Self> {
        let n = cols[0].len();
        if cols.iter().any(|c| c.len() != n) {
            return Err(Error::Checkpoint("ledger columns differ in length".into()));
        }
        let records = (0..n)
            .map(|i| LedgerRecord {
                t: cols[0][i],
                terms: LedgerTerms {
                    expectation: cols[1][i],
                    c1: cols[2][i],
                    c2: cols[3][i],
                    g_interaction: cols[4][i],
                    g_remainder: cols[5][i],
                },
                int_c1: cols[6][i],
                int_c2: cols[7][i],
                int_g: cols[8][i],
                int_abs_g: cols[9][i],
                defect: cols[10][i],
            })
            .collect();
        Ok(LedgerAccumulator { records })
    }

    /// The records as a series of `⟨B(t)⟩` with every other quantity as a column,
    /// plus the finite-difference derivative of `⟨B⟩` as a cross-check.
    pub fn to_series(&self, label: &str) -> Result<DiagnosticSeries> {
        let cols = self.columns();
        let mut s = DiagnosticSeries::new(label);
        s.times = cols[0].clone();
        s.values = cols[1].clone();
        for (name, c) in Self::COLUMNS.iter().zip(&cols).skip(2) {
            s.add_column(*name, c.clone())?;
        }
        s.add_column("dbdt_fd", finite_difference(&cols[0], &cols[1]))?;
        Ok(s)
    }
}

fn finite_difference(t: &[f64], v: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|i| match n {
            0 | 1 => 0.0,
            _ if i == 0 => (v[1] - v[0]) / (t[1] - t[0]),
            _ if i == n - 1 => (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]),
            _ => (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerSummary {
    pub samples: usize,
    pub min_c1: f64,
    pub min_c2: f64,
    pub max_defect: f64,
    pub int_c1: f64,
    pub sup_expectation: f64,
    pub int_abs_g: f64,
}

impl LedgerSummary {
    /// `∫c₁ ≤ sup⟨B⟩ + ‖g‖_{L¹}`
    pub fn propagation_inequality(&self) -> bool {
        self.int_c1 <= self.sup_expectation + self.int_abs_g
    }
}

fn summarize(r: &[LedgerRecord]) -> LedgerSummary {
    let last = r.last().copied().unwrap_or_default();
    LedgerSummary {
        samples: r.len(),
        min_c1: r.iter().map(|r| r.terms.c1).fold(f64::INFINITY, f64::min),
        min_c2: r.iter().map(|r| r.terms.c2).fold(f64::INFINITY, f64::min),
        max_defect: r.iter().map(|r| r.defect).fold(0.0, f64::max),
        int_c1: last.int_c1,
        sup_expectation: r.iter().map(|r| r.terms.expectation).fold(f64::NEG_INFINITY, f64::max),
        int_abs_g: last.int_abs_g,
    }
}

/// Streams the ledger at every observed sample.
#[derive(Debug, Clone)]
pub struct LedgerObserver {
    pub kind: LedgerKind,
    pub alpha: f64,
    pub b: f64,
    pub acc: LedgerAccumulator,
    name: String,
}

impl LedgerObserver {
    pub fn new(kind: LedgerKind, alpha: f64, b: f64) -> Self {
        LedgerObserver { kind, alpha, b, acc: LedgerAccumulator::default(), name: format!("ledger_{}", kind.as_str()) }
    }
}

impl Observer for LedgerObserver {
    fn name(&self) -> &str {
        &self.name
    }

    fn observe(&mut self, s: &Sample<'_>) -> Result<()> {
        let n_psi = s.stepper.interaction_field(s.psi, s.t)?;
        let terms = ledger_terms_at(self.kind, s.psi, &n_psi, s.t, self.alpha, self.b)?;
        self.acc.push(s.t, terms)?;
        Ok(())
    }

    fn save_state(&self) -> ObserverState {
        let mut st = ObserverState::default();
        for (name, c) in LedgerAccumulator::COLUMNS.iter().zip(self.acc.columns()) {
            st.scalars.insert((*name).to_string(), c);
        }
        st
    }

    fn load_state(&mut self, st: &ObserverState) -> Result<()> {
        let empty = Vec::new();
        let cols: Vec<&[f64]> =
            LedgerAccumulator::COLUMNS.iter().map(|n| st.scalars.get(*n).unwrap_or(&empty).as_slice()).collect();
        self.acc = LedgerAccumulator::from_columns(&cols)?;
        Ok(())
    }
}

/// The ledger over the stored samples at `times`.
pub fn propagation_ledger(
    traj: &Trajectory,
    kind: LedgerKind,
    alpha: f64,
    b: f64,
    times: &[f64],
) -> Result<LedgerAccumulator> {
    let spec = traj.config().interaction;
    let mut acc = LedgerAccumulator::default();
    for &t in times {
        let psi = traj.state_at(t)?;
        let n_psi = interaction_field(&spec, None, &psi, t)?;
        acc.push(t, ledger_terms_at(kind, &psi, &n_psi, t, alpha, b)?)?;
    }
    Ok(acc)
}
