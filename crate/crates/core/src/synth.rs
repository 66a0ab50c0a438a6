//! The full pipeline: winning region, per-output extraction, circuit
//! assembly and optional verification.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::aiger::{Aig, SafetySpec};
use crate::circuit::{build_implementation, controller_gates};
use crate::cnf::{Cnf, Var};
use crate::extract_interp::{
    post_minimize, sy_int, ExternalInterpolator, Interpolator, LearningInterpolator, OutputRecord, SyIntOptions,
};
use crate::extract_qbf::{sy_learn_qbf, LearnedFunction};
use crate::game::{check_realizability, compute_winning_region, RegionStats, WinningRegion};
use crate::verify::{verify_implementation, Verdict};
use crate::{Deadline, Result};

pub use crate::neglearn::NegWEncoding;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// QBF-based CNF learning.
    QbfLearn,
    /// Interpolation by learning, with the dependency optimization.
    SatLearn,
    /// Interpolation by learning, outputs in fixed order.
    SatLearnNoDeps,
    /// Interpolation by an external solver (not bundled).
    ExternalInterp,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::QbfLearn, Method::SatLearn, Method::SatLearnNoDeps, Method::ExternalInterp];

    pub fn name(self) -> &'static str {
        match self {
            Method::QbfLearn => "ql",
            Method::SatLearn => "sl",
            Method::SatLearnNoDeps => "sln",
            Method::ExternalInterp => "si",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Method, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown method {s:?} (expected ql, sl, sln or si)"))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SynthOptions {
    pub method: Method,
    pub negw: NegWEncoding,
    pub verify: bool,
    pub deadline: Deadline,
    /// Second pass over interpolants dropping clauses and literals.
    pub post_minimize: bool,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions {
            method: Method::SatLearn,
            negw: NegWEncoding::Aux,
            verify: true,
            deadline: Deadline::none(),
            post_minimize: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Timings {
    pub winning_region: Duration,
    pub extraction: Duration,
    pub total: Duration,
}

#[derive(Clone, Debug)]
pub struct SynthReport {
    pub realizable: bool,
    pub region: WinningRegion,
    pub region_stats: RegionStats,
    /// Empty when unrealizable.
    pub functions: Vec<LearnedFunction>,
    pub implementation: Option<Aig>,
    /// AND gates of the controller: the output networks without the
    /// specification's own logic.
    pub gates: usize,
    /// `None` when verification was not requested.
    pub verdict: Option<Verdict>,
    /// Interpolation records (interpolation methods only).
    pub records: Vec<OutputRecord>,
    pub timings: Timings,
}

impl SynthReport {
    pub fn per_output_iterations(&self) -> Vec<usize> {
        self.functions.iter().map(|f| f.iterations).collect()
    }
}

pub fn synthesize(spec: &SafetySpec, options: &SynthOptions) -> Result<SynthReport> {
    let start = Instant::now();
    let (region, region_stats) = compute_winning_region(spec, options.negw, options.deadline)?;
    let elapsed = start.elapsed();
    let mut report = synthesize_in_region(spec, region, region_stats, options)?;
    report.timings.winning_region = elapsed;
    report.timings.total += elapsed;
    Ok(report)
}

/// Extraction, assembly and verification for an already computed region.
/// The winning-region time in the report is left at zero.
pub fn synthesize_in_region(
    spec: &SafetySpec,
    region: WinningRegion,
    region_stats: RegionStats,
    options: &SynthOptions,
) -> Result<SynthReport> {
    let start = Instant::now();
    let mut timings = Timings::default();
    let mut report = SynthReport {
        realizable: check_realizability(spec, &region),
        region,
        region_stats,
        functions: Vec::new(),
        implementation: None,
        gates: 0,
        verdict: None,
        records: Vec::new(),
        timings,
    };
    if !report.realizable {
        timings.total = start.elapsed();
        report.timings = timings;
        return Ok(report);
    }

    let extraction = Instant::now();
    let w = &report.region;
    let mut functions = match options.method {
        Method::QbfLearn => sy_learn_qbf(spec, w, options.negw, options.deadline)?,
        Method::SatLearn | Method::SatLearnNoDeps | Method::ExternalInterp => {
            let mut learning = LearningInterpolator;
            let mut external = ExternalInterpolator;
            let interp: &mut dyn Interpolator = if options.method == Method::ExternalInterp {
                &mut external
            } else {
                &mut learning
            };
            let sy = SyIntOptions {
                dependency_opt: options.method == Method::SatLearn,
                negw: options.negw,
                deadline: options.deadline,
            };
            let r = sy_int(spec, w, sy, interp)?;
            report.records = r.records;
            r.functions
        }
    };
    let pairs = |fs: &[LearnedFunction]| -> Vec<(Var, Cnf)> { fs.iter().map(|l| (l.output, l.f.clone())).collect() };
    if options.post_minimize && options.method != Method::QbfLearn {
        let min = post_minimize(spec, w, &pairs(&functions), options.negw, options.deadline)?;
        for (l, (_, f)) in functions.iter_mut().zip(min) {
            l.f = f;
        }
    }
    let imp = build_implementation(spec, &pairs(&functions))?;
    timings.extraction = extraction.elapsed();

    if options.verify {
        let verdict = verify_implementation(spec, &imp, w)?;
        if let Verdict::Fail { check, .. } = &verdict {
            log::warn!("verification failed at check {check}");
        }
        report.verdict = Some(verdict);
    }
    report.gates = controller_gates(spec, &pairs(&functions))?;
    report.implementation = Some(imp);
    report.functions = functions;
    timings.total = start.elapsed();
    report.timings = timings;
    Ok(report)
}
