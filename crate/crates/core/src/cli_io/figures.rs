//! Fixed run protocols behind the `figure` command, one per boundary setup.

use crate::error::Result;
use crate::grunwald::DerivativeForm::{self, Caputo, PatieSimon, RiemannLiouville};
use crate::operators::BoundaryCondition::{self, Absorbing, Reflecting};
use crate::operators::SchemeSpec;
use crate::timestepper::{InitialCondition, Method, SolverConfig};

pub const DEFAULT_N: usize = 1000;
pub const DEFAULT_DT: f64 = 1e-3;

const TENT_TIMES: &[f64] = &[0.0, 0.05, 0.1, 0.5];
const BUMP_TIMES: &[f64] = &[0.0, 0.01, 0.04, 0.2];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureProtocol {
    pub id: u8,
    pub form: DerivativeForm,
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub bump: bool,
    pub description: &'static str,
}

impl FigureProtocol {
    pub fn initial(&self) -> InitialCondition {
        if self.bump {
            InitialCondition::SineBump
        } else {
            InitialCondition::Tent
        }
    }

    pub fn snapshot_times(&self) -> &'static [f64] {
        if self.bump {
            BUMP_TIMES
        } else {
            TENT_TIMES
        }
    }

    /// Solver configuration at alpha = 1.5, C = 1.
    pub fn config(&self, n: usize, dt: f64, method: Method) -> Result<SolverConfig> {
        let spec = SchemeSpec::new(self.form, self.left, self.right, 1.5, 1.0, n)?;
        let times = self.snapshot_times().to_vec();
        let t_end = *times.last().expect("non-empty");
        SolverConfig::new(spec, dt, t_end, method, times, self.initial())
    }
}

pub const FIGURES: [FigureProtocol; 7] = [
    FigureProtocol {
        id: 1,
        form: RiemannLiouville,
        left: Absorbing,
        right: Absorbing,
        bump: false,
        description: "Riemann-Liouville, absorbing/absorbing, tent",
    },
    FigureProtocol {
        id: 2,
        form: RiemannLiouville,
        left: Reflecting,
        right: Reflecting,
        bump: false,
        description: "Riemann-Liouville, reflecting/reflecting, tent",
    },
    FigureProtocol {
        id: 3,
        form: RiemannLiouville,
        left: Reflecting,
        right: Absorbing,
        bump: false,
        description: "Riemann-Liouville, reflecting left/absorbing right, tent",
    },
    FigureProtocol {
        id: 4,
        form: RiemannLiouville,
        left: Absorbing,
        right: Reflecting,
        bump: false,
        description: "Riemann-Liouville, absorbing left/reflecting right, tent",
    },
    FigureProtocol {
        id: 5,
        form: PatieSimon,
        left: Reflecting,
        right: Reflecting,
        bump: false,
        description: "Caputo flux (Patie-Simon), reflecting/reflecting, tent",
    },
    FigureProtocol {
        id: 6,
        form: PatieSimon,
        left: Reflecting,
        right: Absorbing,
        bump: false,
        description: "Caputo flux (Patie-Simon), reflecting left/absorbing right, tent",
    },
    FigureProtocol {
        id: 7,
        form: Caputo,
        left: Absorbing,
        right: Absorbing,
        bump: true,
        description: "Caputo derivative, absorbing/absorbing, sine bump (goes negative)",
    },
];

pub fn figure(id: u8) -> Option<&'static FigureProtocol> {
    FIGURES.iter().find(|f| f.id == id)
}

/// Table printed by `figure --list`.
pub fn catalogue() -> String {
    let mut out = String::from("id  deriv   left        right       ic    snapshots\n");
    for f in &FIGURES {
        let times: Vec<String> = f.snapshot_times().iter().map(|t| t.to_string()).collect();
        out.push_str(&format!(
            "{:<3} {:<7} {:<11} {:<11} {:<5} {}   # {}\n",
            f.id,
            f.form.as_str(),
            f.left.as_str(),
            f.right.as_str(),
            f.initial().to_string(),
            times.join(","),
            f.description
        ));
    }
    out
}
