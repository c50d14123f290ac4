use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Horizontal {
    Left,
    Center,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vertical {
    Top,
    Center,
    Bottom,
}

/// One of the nine cells of a thirds grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    pub horizontal: Horizontal,
    pub vertical: Vertical,
}

impl Anchor {
    pub const CENTER: Anchor = Anchor {
        horizontal: Horizontal::Center,
        vertical: Vertical::Center,
    };

    pub fn new(vertical: Vertical, horizontal: Horizontal) -> Self {
        Self {
            horizontal,
            vertical,
        }
    }

    pub fn all() -> [Anchor; 9] {
        use Horizontal as H;
        use Vertical as V;
        let mut out = [Anchor::CENTER; 9];
        let mut i = 0;
        for v in [V::Top, V::Center, V::Bottom] {
            for h in [H::Left, H::Center, H::Right] {
                out[i] = Anchor::new(v, h);
                i += 1;
            }
        }
        out
    }

    /// Column and row of the cell, each in `0..3`.
    pub fn cell(&self) -> (u32, u32) {
        let col = match self.horizontal {
            Horizontal::Left => 0,
            Horizontal::Center => 1,
            Horizontal::Right => 2,
        };
        let row = match self.vertical {
            Vertical::Top => 0,
            Vertical::Center => 1,
            Vertical::Bottom => 2,
        };
        (col, row)
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.vertical {
            Vertical::Top => "top",
            Vertical::Center => "center",
            Vertical::Bottom => "bottom",
        };
        let h = match self.horizontal {
            Horizontal::Left => "left",
            Horizontal::Center => "center",
            Horizontal::Right => "right",
        };
        if self.vertical == Vertical::Center && self.horizontal == Horizontal::Center {
            f.write_str("center")
        } else {
            write!(f, "{v}-{h}")
        }
    }
}

impl FromStr for Anchor {
    type Err = Error;

    /// Accepts forms like `top-right`, `center right`, `bottom center`, `center`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let words: Vec<&str> = lower
            .split(|c: char| !c.is_ascii_alphabetic())
            .filter(|w| !w.is_empty())
            .collect();
        if words.is_empty() {
            return Err(Error::MissingParameter(format!("anchor `{s}`")));
        }
        let mut vertical = Vertical::Center;
        let mut horizontal = Horizontal::Center;
        for w in words {
            match w {
                "top" | "upper" => vertical = Vertical::Top,
                "bottom" | "lower" => vertical = Vertical::Bottom,
                "left" => horizontal = Horizontal::Left,
                "right" => horizontal = Horizontal::Right,
                "center" | "centre" | "middle" => {}
                _ => return Err(Error::MissingParameter(format!("anchor `{s}`"))),
            }
        }
        Ok(Anchor::new(vertical, horizontal))
    }
}
