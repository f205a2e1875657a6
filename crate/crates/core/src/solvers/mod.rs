//! Stochastic solvers.
//!
//! Every solver has the signature `fn(&dyn Problem, &SolverOptions) -> Result<SolverResult>`
//! and reads its variant from `opts.sub_mode`. [`Method`] names the full roster,
//! including fixed sub-modes and per-method local defaults, and runs a method
//! after merging option layers.

mod adaptive;
mod bb_sgd;
mod iqn;
mod obfgs;
mod sag;
mod sarah;
mod sgd;
mod slbfgs;
mod subsamp_svrg;
mod svrg;

pub use adaptive::{adagrad_family, adam_family, AdaptiveState};
pub use bb_sgd::{bb_sgd, descent_test};
pub use iqn::{iqn, IqnState};
pub use obfgs::obfgs;
pub use sag::{sag_saga, GradientTable};
pub use sarah::{sarah, sarah_estimate};
pub use sgd::{sgd, sgd_momentum};
pub use slbfgs::slbfgs;
pub use subsamp_svrg::{floored_preconditioner, subsamp_svrg};
pub use svrg::{bb_step, svrg, svrg_bb, Snapshot};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::options::{merge_options, PartialOptions, SolverOptions, SubMode};
use crate::record::SolverResult;
use crate::Problem;

/// Every solver configuration of the roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Sgd,
    SgdCm,
    SgdCmNag,
    AdaGrad,
    RmsProp,
    AdaDelta,
    Adam,
    AdaMax,
    Svrg,
    Sag,
    Saga,
    Sarah,
    SarahPlus,
    SvrgBb,
    BbSgd,
    ObfgsInf,
    OlbfgsLim,
    RegObfgsInf,
    DampObfgsInf,
    Sqn,
    SvrgSqn,
    SvrgLbfgs,
    SsSvrg,
    Iqn,
}

impl Method {
    pub const ALL: [Method; 24] = [
        Method::Sgd,
        Method::SgdCm,
        Method::SgdCmNag,
        Method::AdaGrad,
        Method::RmsProp,
        Method::AdaDelta,
        Method::Adam,
        Method::AdaMax,
        Method::Svrg,
        Method::Sag,
        Method::Saga,
        Method::Sarah,
        Method::SarahPlus,
        Method::SvrgBb,
        Method::BbSgd,
        Method::ObfgsInf,
        Method::OlbfgsLim,
        Method::RegObfgsInf,
        Method::DampObfgsInf,
        Method::Sqn,
        Method::SvrgSqn,
        Method::SvrgLbfgs,
        Method::SsSvrg,
        Method::Iqn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sgd => "SGD",
            Method::SgdCm => "SGD-CM",
            Method::SgdCmNag => "SGD-CM-NAG",
            Method::AdaGrad => "AdaGrad",
            Method::RmsProp => "RMSProp",
            Method::AdaDelta => "AdaDelta",
            Method::Adam => "Adam",
            Method::AdaMax => "AdaMax",
            Method::Svrg => "SVRG",
            Method::Sag => "SAG",
            Method::Saga => "SAGA",
            Method::Sarah => "SARAH",
            Method::SarahPlus => "SARAH-Plus",
            Method::SvrgBb => "SVRG-BB",
            Method::BbSgd => "BB-SGD",
            Method::ObfgsInf => "oBFGS-Inf",
            Method::OlbfgsLim => "oLBFGS-Lim",
            Method::RegObfgsInf => "Reg-oBFGS-Inf",
            Method::DampObfgsInf => "Damp-oBFGS-Inf",
            Method::Sqn => "SQN",
            Method::SvrgSqn => "SVRG-SQN",
            Method::SvrgLbfgs => "SVRG-LBFGS",
            Method::SsSvrg => "SS-SVRG",
            Method::Iqn => "IQN",
        }
    }

    /// Fixed sub-mode of the method, if any.
    pub fn sub_mode(self) -> Option<SubMode> {
        match self {
            Method::SgdCm => Some(SubMode::Cm),
            Method::SgdCmNag => Some(SubMode::CmNag),
            Method::AdaGrad => Some(SubMode::AdaGrad),
            Method::RmsProp => Some(SubMode::RMSProp),
            Method::AdaDelta => Some(SubMode::AdaDelta),
            Method::Adam => Some(SubMode::Adam),
            Method::AdaMax => Some(SubMode::AdaMax),
            Method::Sag => Some(SubMode::Sag),
            Method::Saga => Some(SubMode::Saga),
            Method::SarahPlus => Some(SubMode::Plus),
            Method::ObfgsInf | Method::RegObfgsInf | Method::DampObfgsInf => Some(SubMode::InfMem),
            Method::OlbfgsLim => Some(SubMode::LimMem),
            Method::Sqn => Some(SubMode::Sqn),
            Method::SvrgSqn => Some(SubMode::SvrgSqn),
            Method::SvrgLbfgs => Some(SubMode::SvrgLbfgs),
            _ => None,
        }
    }

    /// Method-specific defaults layered between the global defaults and user overrides.
    pub fn local_defaults(self) -> PartialOptions {
        let mut local = PartialOptions {
            sub_mode: self.sub_mode(),
            ..Default::default()
        };
        match self {
            Method::AdaDelta => {
                local.decay_rate = Some(0.95);
                local.epsilon = Some(1e-6);
            }
            Method::Adam | Method::AdaMax => local.step_init = Some(0.01),
            Method::Sag | Method::Saga => local.batch_size = Some(1),
            Method::RegObfgsInf => local.delta = Some(0.1),
            Method::DampObfgsInf => {
                local.delta = Some(0.1);
                local.damped = Some(true);
            }
            _ => {}
        }
        local
    }

    /// Runs the solver with exactly these options.
    pub fn run(self, problem: &dyn Problem, opts: &SolverOptions) -> Result<SolverResult> {
        if let (Some(fixed), Some(given)) = (self.sub_mode(), opts.sub_mode) {
            if fixed != given {
                return Err(Error::config(
                    "sub_mode",
                    format!(
                        "{} runs sub_mode {}, not {}",
                        self.name(),
                        fixed.as_str(),
                        given.as_str()
                    ),
                ));
            }
        }
        let result = match self {
            Method::Sgd => sgd(problem, opts),
            Method::SgdCm | Method::SgdCmNag => sgd_momentum(problem, opts),
            Method::AdaGrad | Method::RmsProp | Method::AdaDelta => adagrad_family(problem, opts),
            Method::Adam | Method::AdaMax => adam_family(problem, opts),
            Method::Svrg => svrg(problem, opts),
            Method::Sag | Method::Saga => sag_saga(problem, opts),
            Method::Sarah | Method::SarahPlus => sarah(problem, opts),
            Method::SvrgBb => svrg_bb(problem, opts),
            Method::BbSgd => bb_sgd(problem, opts),
            Method::ObfgsInf | Method::OlbfgsLim | Method::RegObfgsInf | Method::DampObfgsInf => obfgs(problem, opts),
            Method::Sqn | Method::SvrgSqn | Method::SvrgLbfgs => slbfgs(problem, opts),
            Method::SsSvrg => subsamp_svrg(problem, opts),
            Method::Iqn => iqn(problem, opts),
        };
        result.map(|mut r| {
            r.solver = self.name().to_string();
            r
        })
    }

    /// Merges `global`, this method's local defaults and `user`, then runs.
    pub fn solve(self, problem: &dyn Problem, global: &SolverOptions, user: &PartialOptions) -> Result<SolverResult> {
        let opts = merge_options(global, &self.local_defaults(), user)?;
        self.run(problem, &opts)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn normalize(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

impl FromStr for Method {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are ignored, so `svrg_bb` and `SVRG-BB` agree.
    fn from_str(s: &str) -> Result<Self> {
        let key = normalize(s);
        let alias = match key.as_str() {
            "sgdnag" | "nag" => Some(Method::SgdCmNag),
            "momentum" | "sgdmomentum" => Some(Method::SgdCm),
            "sarahplus" | "sarah+" => Some(Method::SarahPlus),
            "obfgs" => Some(Method::ObfgsInf),
            "olbfgs" | "lbfgs" => Some(Method::OlbfgsLim),
            "regobfgs" => Some(Method::RegObfgsInf),
            "dampobfgs" => Some(Method::DampObfgsInf),
            "subsampsvrg" => Some(Method::SsSvrg),
            _ => None,
        };
        alias
            .or_else(|| Method::ALL.into_iter().find(|m| normalize(m.name()) == key))
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::Argument(format!("unknown solver `{s}`; valid names: {}", names.join(", ")))
            })
    }
}
