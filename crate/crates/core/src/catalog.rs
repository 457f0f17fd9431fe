//! The six worked examples shipped as spec files, with their closed-form
//! limits, and the end-to-end run that reproduces each one.

use std::f64::consts::PI;

use crate::asymptote::{classify, AsymptoteReport, Governing};
use crate::error::Result;
use crate::solver::{solve, verify_solution, SolutionAudit, WeightedTrajectory};
use crate::specfile::SpecFile;

#[derive(Debug, Clone, Copy)]
pub struct Example {
    pub id: &'static str,
    pub equation: &'static str,
    pub spec_json: &'static str,
    /// Closed form of `lim x(t)`.
    pub symbolic_limit: &'static str,
    pub limit: fn() -> f64,
    pub governing: Governing,
}

impl Example {
    pub fn spec_file(&self) -> SpecFile {
        SpecFile::from_json(self.spec_json).expect("shipped spec files parse")
    }

    pub fn file_name(&self) -> String {
        format!("example-{}.json", self.id)
    }
}

pub const EXAMPLES: [Example; 6] = [
    Example {
        id: "4.1",
        equation: "D^(1/2) x = (t^(-3/4) + t^(-1/2)) (x+1)/(x+2)",
        spec_json: include_str!("../specs/example-4.1.json"),
        symbolic_limit: "(sqrt(pi) + sqrt(4+pi) - 2)/2",
        limit: || (PI.sqrt() + (4.0 + PI).sqrt() - 2.0) / 2.0,
        governing: Governing::UniqueRoot,
    },
    Example {
        id: "4.2",
        equation: "D^(1/2) x = t^(-0.7) ln(1 + x^0.5)",
        spec_json: include_str!("../specs/example-4.2.json"),
        symbolic_limit: "0",
        limit: || 0.0,
        governing: Governing::Vanishing,
    },
    Example {
        id: "4.3",
        equation: "D^(1/2) x = t^(-1/2) cbrt(x)",
        spec_json: include_str!("../specs/example-4.3.json"),
        symbolic_limit: "pi^(3/4)",
        limit: || PI.powf(0.75),
        governing: Governing::LargestRoot,
    },
    Example {
        id: "4.4",
        equation: "D^(1/2) x = (sqrt(x) + sqrt(t))/(1+t)",
        spec_json: include_str!("../specs/example-4.4.json"),
        symbolic_limit: "sqrt(pi)",
        limit: || PI.sqrt(),
        governing: Governing::DecayingCoefficient,
    },
    Example {
        id: "4.5",
        equation: "D^(1/2) x = sqrt(x + t)/(1+t)",
        spec_json: include_str!("../specs/example-4.5.json"),
        symbolic_limit: "sqrt(pi)",
        limit: || PI.sqrt(),
        governing: Governing::Sandwich,
    },
    Example {
        id: "4.6",
        equation: "D^(1/2) x = t^(-2/3) cbrt(x) - t^(-1/2)",
        spec_json: include_str!("../specs/example-4.6.json"),
        symbolic_limit: "-sqrt(pi)",
        limit: || -PI.sqrt(),
        governing: Governing::Sandwich,
    },
];

pub fn find(id: &str) -> Option<&'static Example> {
    EXAMPLES.iter().find(|e| e.id == id)
}

/// Classification, solve to `Tmax`, extrapolated limit and solution audit
/// for one example.
#[derive(Debug, Clone)]
pub struct Reproduction {
    pub example: &'static Example,
    pub report: AsymptoteReport,
    pub trajectory: WeightedTrajectory,
    pub audit: SolutionAudit,
    pub seconds: f64,
}

impl Reproduction {
    /// `|extrapolated - exact| / max(1, |exact|)`.
    pub fn gap(&self) -> f64 {
        let exact = (self.example.limit)();
        self.report
            .extrapolated_solver_limit
            .map_or(f64::INFINITY, |x| (x - exact).abs() / exact.abs().max(1.0))
    }
}

pub fn reproduce(example: &'static Example) -> Result<Reproduction> {
    let start = std::time::Instant::now();
    let file = example.spec_file();
    let spec = file.problem()?;
    let config = file.solver_config()?;
    let mut report = classify(&spec);
    let trajectory = solve(&spec, &config)?;
    report.attach_trajectory(&trajectory)?;
    let audit = verify_solution(&spec, &trajectory, config.tol);
    Ok(Reproduction {
        example,
        report,
        trajectory,
        audit,
        seconds: start.elapsed().as_secs_f64(),
    })
}
