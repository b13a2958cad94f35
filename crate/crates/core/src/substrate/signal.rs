use std::fmt;

use serde::{Deserialize, Serialize};

/// Integer message in -3..=3. Zero means no signal; negatives inhibit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub struct Signal(i8);

impl Signal {
    pub const MAX: i8 = 3;
    pub const ZERO: Signal = Signal(0);
    pub const FULL: Signal = Signal(3);

    /// Returns `None` outside -3..=3.
    pub fn new(v: i8) -> Option<Signal> {
        (-Self::MAX..=Self::MAX).contains(&v).then_some(Signal(v))
    }

    /// Clamp any integer into range.
    pub fn saturating(v: i64) -> Signal {
        Signal(v.clamp(-3, 3) as i8)
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn magnitude(self) -> u8 {
        self.0.unsigned_abs()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl TryFrom<i8> for Signal {
    type Error = String;
    fn try_from(v: i8) -> Result<Self, Self::Error> {
        Signal::new(v).ok_or_else(|| format!("signal {v} outside -3..=3"))
    }
}

impl From<Signal> for i8 {
    fn from(s: Signal) -> i8 {
        s.0
    }
}

impl fmt::Display for Signal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
