use serde::{Deserialize, Serialize};

/// Which parameter region is being checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremMode {
    /// `α ∈ (0, min{σ−1, 1/4})`, `b ∈ (0, α)`
    Thm1,
    /// `α ∈ (0, 1/2 − 2/n)`
    Thm2,
    /// `e = 1/4 + 3/(2δ)`, `σ = δ − 1/e`, `b ∈ (0, (1−e)/3)`, `α ∈ (b, 1−3b)`
    Prop21,
    /// `α ∈ [1/4, 1/4 + ε)`, `b = 1/4 − ε/3`
    WeakLocalization,
}

impl TheoremMode {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "thm1" => TheoremMode::Thm1,
            "thm2" => TheoremMode::Thm2,
            "prop21" => TheoremMode::Prop21,
            "weak_localization" => TheoremMode::WeakLocalization,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremMode::Thm1 => "thm1",
            TheoremMode::Thm2 => "thm2",
            TheoremMode::Prop21 => "prop21",
            TheoremMode::WeakLocalization => "weak_localization",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Constraint {
    pub region: &'static str,
    pub statement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Derived {
    pub e: Option<f64>,
    pub sigma: Option<f64>,
    /// `eδ − 1`, the interaction decay rate
    pub decay: Option<f64>,
    pub b_max: Option<f64>,
    pub alpha_max: Option<f64>,
    /// `1/4 − ε/3`
    pub b_weak: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub mode: TheoremMode,
    pub constraints: Vec<Constraint>,
    pub derived: Derived,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.constraints.iter().all(|c| c.holds)
    }

    pub fn violations(&self) -> Vec<String> {
        self.constraints
            .iter()
            .filter(|c| !c.holds)
            .map(|c| format!("[{}] {}", c.region, c.statement))
            .collect()
    }

    fn push(&mut self, region: &'static str, holds: bool, statement: String) {
        self.constraints.push(Constraint { region, statement, holds });
    }
}

/// `e`, `σ = δ − 1/e` and `eδ − 1` for a given `δ`.
pub fn prop21_relations(delta: f64) -> (f64, f64, f64) {
    let e = 0.25 + 1.5 / delta;
    (e, delta - 1.0 / e, e * delta - 1.0)
}

/// Checks the parameter region of `mode`, naming each violated inequality.
///
/// In `thm1` mode a supplied `δ` also enforces the interaction-decay window, so the
/// admissible set is the intersection of both regions.
pub fn validate_params(
    alpha: f64,
    b: f64,
    eps: f64,
    delta: Option<f64>,
    sigma: Option<f64>,
    n: usize,
    mode: TheoremMode,
) -> AdmissibilityReport {
    let mut r = AdmissibilityReport { mode, constraints: Vec::new(), derived: Derived::default() };
    match mode {
        TheoremMode::Thm1 => {
            thm1(&mut r, alpha, b, sigma);
            if let Some(d) = delta {
                prop21(&mut r, alpha, b, d, sigma);
            }
        }
        TheoremMode::Thm2 => {
            let hi = 0.5 - 2.0 / n as f64;
            r.derived.alpha_max = Some(hi);
            r.push("thm2", alpha > 0.0 && alpha < hi, format!("0 < alpha = {alpha} < 1/2 - 2/n = {hi}"));
        }
        TheoremMode::Prop21 => match delta {
            Some(d) => prop21(&mut r, alpha, b, d, sigma),
            None => r.push("prop21", false, "delta is required".into()),
        },
        TheoremMode::WeakLocalization => {
            let bw = 0.25 - eps / 3.0;
            r.derived.b_weak = Some(bw);
            r.push("weak_localization", eps > 0.0, format!("epsilon = {eps} > 0"));
            r.push(
                "weak_localization",
                (0.25..0.25 + eps).contains(&alpha),
                format!("1/4 <= alpha = {alpha} < 1/4 + epsilon = {}", 0.25 + eps),
            );
            r.push(
                "weak_localization",
                (b - bw).abs() <= 1e-12,
                format!("b = {b} equals 1/4 - epsilon/3 = {bw}"),
            );
        }
    }
    r
}

fn thm1(r: &mut AdmissibilityReport, alpha: f64, b: f64, sigma: Option<f64>) {
    let hi = match sigma {
        Some(s) => {
            r.push("thm1", s > 1.0, format!("sigma = {s} > 1"));
            (s - 1.0).min(0.25)
        }
        None => 0.25,
    };
    r.derived.alpha_max = Some(hi);
    r.push("thm1", alpha > 0.0 && alpha < hi, format!("0 < alpha = {alpha} < min(sigma - 1, 1/4) = {hi}"));
    r.push("thm1", b > 0.0 && b < alpha, format!("0 < b = {b} < alpha = {alpha}"));
}

fn prop21(r: &mut AdmissibilityReport, alpha: f64, b: f64, delta: f64, sigma: Option<f64>) {
    if !(delta > 0.0) {
        r.push("prop21", false, format!("delta = {delta} > 0"));
        return;
    }
    let (e, s, decay) = prop21_relations(delta);
    let b_max = (1.0 - e) / 3.0;
    r.derived.e = Some(e);
    r.derived.sigma = Some(s);
    r.derived.decay = Some(decay);
    r.derived.b_max = Some(b_max);
    r.push("prop21", s > 1.0, format!("sigma = delta - 1/e = {s} > 1"));
    if let Some(given) = sigma {
        r.push(
            "prop21",
            (given - s).abs() <= 1e-9,
            format!("potential sigma = {given} equals delta - 1/e = {s}"),
        );
    }
    r.push("prop21", b > 0.0 && b < b_max, format!("0 < b = {b} < (1 - e)/3 = {b_max}"));
    r.push(
        "prop21",
        alpha > b && alpha < 1.0 - 3.0 * b,
        format!("b = {b} < alpha = {alpha} < 1 - 3b = {}", 1.0 - 3.0 * b),
    );
}
