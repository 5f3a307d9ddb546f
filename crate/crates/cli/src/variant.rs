//! Variant names such as `TOP-S-SU`, `CNT-W-IT` or `FRC-O-S`.

use std::fmt;
use std::str::FromStr;

use demers::forcelayout::{ForceInit, QualityForce};
use demers::lpmodel::{Objective, Stability};
use demers::sepconstraints::Setting;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    Lp {
        objective: Objective,
        setting: Setting,
        stability: Stability,
    },
    Frc {
        quality: QualityForce,
        init: ForceInit,
    },
}

impl Variant {
    pub fn is_frc(&self) -> bool {
        matches!(self, Variant::Frc { .. })
    }

    /// The 18 LP and 4 force-directed variants of the standard experiment.
    pub fn standard_set() -> Vec<Variant> {
        let mut out = Vec::new();
        for objective in [Objective::Top, Objective::Org, Objective::Cnt] {
            for setting in [Setting::Strong, Setting::Weak] {
                for stability in [Stability::Co, Stability::Su, Stability::It] {
                    out.push(Variant::Lp {
                        objective,
                        setting,
                        stability,
                    });
                }
            }
        }
        for quality in [QualityForce::Origin, QualityForce::Topology] {
            for init in [ForceInit::PreviousLayout, ForceInit::MapOrigins] {
                out.push(Variant::Frc { quality, init });
            }
        }
        out
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        let parts: Vec<&str> = upper.split('-').collect();
        match parts.as_slice() {
            ["FRC", q, i] => {
                let quality = match *q {
                    "O" => QualityForce::Origin,
                    "T" => QualityForce::Topology,
                    _ => return Err(format!("unknown force quality {q:?} in {s:?}")),
                };
                let init = match *i {
                    "S" => ForceInit::PreviousLayout,
                    "U" => ForceInit::MapOrigins,
                    _ => return Err(format!("unknown force init {i:?} in {s:?}")),
                };
                Ok(Variant::Frc { quality, init })
            }
            [o, st, stab] => {
                let objective: Objective = o.parse()?;
                let setting = match *st {
                    "S" => Setting::Strong,
                    "W" => Setting::Weak,
                    _ => return Err(format!("unknown setting {st:?} in {s:?}")),
                };
                let stability: Stability = stab.parse()?;
                if stability == Stability::None {
                    return Err(format!("{s:?} needs a stability suffix (CO, SU, IT or CENTRAL)"));
                }
                Ok(Variant::Lp {
                    objective,
                    setting,
                    stability,
                })
            }
            _ => Err(format!("cannot parse variant {s:?}")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Lp {
                objective,
                setting,
                stability,
            } => {
                let st = match setting {
                    Setting::Strong => "S",
                    Setting::Weak => "W",
                };
                write!(f, "{objective}-{st}-{stability}")
            }
            Variant::Frc { quality, init } => {
                let q = match quality {
                    QualityForce::Origin => "O",
                    QualityForce::Topology => "T",
                };
                let i = match init {
                    ForceInit::PreviousLayout => "S",
                    ForceInit::MapOrigins => "U",
                };
                write!(f, "FRC-{q}-{i}")
            }
        }
    }
}
