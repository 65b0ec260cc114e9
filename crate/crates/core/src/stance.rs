use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Binary stance towards TCM. `Supporting` is the majority class and the
/// positive side (`+1`) of the linear decision function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stance {
    #[serde(rename = "support")]
    Supporting,
    #[serde(rename = "oppose")]
    Opposing,
}

impl Stance {
    pub const ALL: [Stance; 2] = [Stance::Supporting, Stance::Opposing];

    /// Label used by the SVM: `+1` for Supporting, `-1` for Opposing.
    pub fn sign(self) -> f64 {
        match self {
            Stance::Supporting => 1.0,
            Stance::Opposing => -1.0,
        }
    }

    pub fn opposite(self) -> Stance {
        match self {
            Stance::Supporting => Stance::Opposing,
            Stance::Opposing => Stance::Supporting,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stance::Supporting => "support",
            Stance::Opposing => "oppose",
        }
    }
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stance {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "support" => Ok(Stance::Supporting),
            "oppose" => Ok(Stance::Opposing),
            other => Err(format!(
                "unknown stance `{other}` (expected `support` or `oppose`)"
            )),
        }
    }
}
