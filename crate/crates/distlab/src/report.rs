use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use distlab_core::discrimination::{
    DiscriminationVerdict, GlobalVerdict, HarnessReport, InvarianceReport, Mode, PptReport, Violation,
};
use distlab_core::povm::{KindReport, Povm};
use distlab_core::sdp::{SdpSolution, SdpStatus};
use distlab_core::states::StateSet;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: String,
    pub payload: Payload,
    pub manifest: RunManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "snake_case", deny_unknown_fields)]
pub enum Payload {
    StateSet(StateSet),
    Povm(Povm),
    KindReport(KindReport),
    Verdict(DiscriminationVerdict),
    GlobalVerdict(GlobalVerdict),
    Harness(HarnessReport),
    SdpSolution(SdpSolution),
    PptReport(PptReport),
    Invariance(InvarianceReport),
    Counterexample(Box<Counterexample>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, exactly as given.
    pub arguments: Vec<String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    /// SHA-256 of every input file, keyed by the path as given.
    pub input_digests: BTreeMap<String, String>,
    /// RFC 3339; only recorded with `--timestamps`.
    pub started_at: Option<String>,
    pub finished_at: Option<String>,
}

/// The four-outcome projective measurement on a 4-dimensional system and
/// its restriction to the leading 3-dimensional subspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Counterexample {
    pub povm: Povm,
    pub valid: bool,
    pub projective: bool,
    /// The same four elements on `(2,2)` with their Hadamard product witness.
    pub product_form: Povm,
    pub product_form_separable: bool,
    pub restriction: Povm,
    pub restriction_valid: bool,
    pub restriction_projective: bool,
    /// Eigenvalues of the first restricted element, ascending.
    pub restricted_spectrum: Vec<f64>,
    pub passes: bool,
}

impl Payload {
    /// Whether the check this payload records succeeded.
    pub fn passes(&self) -> bool {
        match self {
            Payload::StateSet(_) | Payload::Povm(_) => true,
            Payload::KindReport(r) => r.passes(),
            Payload::Verdict(v) => v.passes,
            Payload::GlobalVerdict(v) => v.distinguishable,
            Payload::Harness(h) => h.passes,
            Payload::SdpSolution(s) => s.status == SdpStatus::Optimal,
            Payload::PptReport(r) => r.distinguishable,
            Payload::Invariance(r) => r.passes,
            Payload::Counterexample(c) => c.passes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSchema(pub String);

impl std::fmt::Display for UnknownSchema {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "unknown report schema version {:?}", self.0)
    }
}

impl std::error::Error for UnknownSchema {}

fn pass(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Six decimals, without a sign on values that round to zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        s[1..].to_string()
    } else {
        s
    }
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|&x| fixed(x)).collect::<Vec<_>>().join(", ")
}

/// Human-readable rendering of a report. Fixed-point values use six
/// decimals and residuals six significant digits.
pub fn summarize(report: &Report) -> Result<String, UnknownSchema> {
    if report.schema_version != SCHEMA_VERSION {
        return Err(UnknownSchema(report.schema_version.clone()));
    }
    let mut out = String::new();
    let w = &mut out;
    match &report.payload {
        Payload::StateSet(set) => {
            let _ = writeln!(w, "STATE SET: {} states on {}", set.len(), set.dims());
            for s in set.iter() {
                let _ = writeln!(w, "  {}", s.label());
            }
        }
        Payload::Povm(p) => {
            let _ = writeln!(w, "POVM ({}): {} elements on {}", p.kind(), p.len(), p.dims());
        }
        Payload::KindReport(r) => {
            let _ = writeln!(w, "POVM CHECK ({}): {}", r.kind, pass(r.passes()));
            let _ = writeln!(w, "  completeness residual {:.6e}", r.povm.completeness_residual);
            let min = r.povm.min_eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            let _ = writeln!(w, "  min eigenvalue {min:.6e}");
            if !r.detail.is_empty() {
                let _ = writeln!(w, "  {}", r.detail);
            }
        }
        Payload::Verdict(v) => {
            let mode = match v.mode {
                Mode::Perfect => "PERFECT",
                Mode::Unambiguous => "UNAMBIGUOUS",
            };
            let _ = writeln!(
                w,
                "{mode} DISCRIMINATION: {} (success {})",
                pass(v.passes),
                fixed(v.success_probability)
            );
            for violation in &v.violations {
                let _ = match violation {
                    Violation::SharedOutcome { outcome, states } => {
                        writeln!(w, "  outcome {outcome} fires on states {states:?}")
                    }
                    Violation::Unidentified { state, probability } => {
                        writeln!(w, "  state {state} identified with probability {}", fixed(*probability))
                    }
                    Violation::Undetected { state } => writeln!(w, "  state {state} never detected"),
                };
            }
        }
        Payload::GlobalVerdict(v) => {
            let _ = writeln!(w, "GLOBAL DISTINGUISHABILITY: {}", pass(v.distinguishable));
        }
        Payload::Harness(h) => {
            let mut failed: Vec<_> = h.failures.iter().map(|f| (f.seed_offset, f.kind)).collect();
            failed.dedup();
            let _ = write!(w, "FUZZ: {}/{} ", h.checks - failed.len(), h.checks);
            let _ = if failed.is_empty() {
                writeln!(w, "OK")
            } else {
                writeln!(w, "OK ({} FAILED)", failed.len())
            };
            if let Some(r) = h.max_trace_residual {
                let _ = writeln!(w, "  max trace residual {r:.6e}");
            }
            for f in &h.failures {
                let _ = writeln!(
                    w,
                    "  offset {} {}: {} ({:.6e})",
                    f.seed_offset, f.kind, f.reason, f.residual
                );
            }
        }
        Payload::SdpSolution(s) => {
            let _ = writeln!(
                w,
                "SDP: {} (objective {}, {} iterations)",
                s.status,
                fixed(s.objective),
                s.iterations
            );
            let _ = writeln!(
                w,
                "  residuals affine {:.6e}, cone {:.6e}, gap {:.6e}",
                s.residuals.affine, s.residuals.cone, s.residuals.gap
            );
        }
        Payload::PptReport(r) => {
            let _ = writeln!(w, "PPT OPTIMUM: {} ({})", fixed(r.optimum), r.status);
            let _ = writeln!(w, "PPT DISTINGUISHABLE: {}", pass(r.distinguishable));
        }
        Payload::Invariance(r) => {
            let _ = writeln!(w, "PPT INVARIANCE {} -> {}: {}", r.dims, r.new_dims, pass(r.passes));
            let _ = writeln!(
                w,
                "  optimum {} -> {} (delta {:.6e})",
                fixed(r.opt_small),
                fixed(r.opt_big),
                r.delta
            );
        }
        Payload::Counterexample(c) => {
            let _ = writeln!(w, "COUNTEREXAMPLE: {}", pass(c.passes));
            let _ = writeln!(w, "  4x4 POVM valid {}, projective {}", c.valid, c.projective);
            let _ = writeln!(w, "  product form on (2,2) separable {}", c.product_form_separable);
            let _ = writeln!(
                w,
                "  3x3 restriction valid {}, projective {}",
                c.restriction_valid, c.restriction_projective
            );
            let _ = writeln!(
                w,
                "  first restricted element spectrum [{}]",
                list(&c.restricted_spectrum)
            );
        }
    }
    Ok(out)
}
