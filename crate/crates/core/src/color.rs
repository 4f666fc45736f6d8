//! Color names and hex parsing for object sprites.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Color {
    Transparent,
    Rgb(u8, u8, u8),
}

impl Color {
    pub fn rgb(self) -> Option<(u8, u8, u8)> {
        match self {
            Color::Transparent => None,
            Color::Rgb(r, g, b) => Some((r, g, b)),
        }
    }
}

/// Resolve a color word: a palette name, or `#rgb` / `#rrggbb` hex.
pub fn parse_color(word: &str) -> Option<Color> {
    if let Some(c) = named(word) {
        return Some(c);
    }
    let hex = word.strip_prefix('#')?;
    let v = u32::from_str_radix(hex, 16).ok()?;
    match hex.len() {
        3 => {
            let r = ((v >> 8) & 0xf) as u8;
            let g = ((v >> 4) & 0xf) as u8;
            let b = (v & 0xf) as u8;
            Some(Color::Rgb(r * 17, g * 17, b * 17))
        }
        6 => Some(Color::Rgb((v >> 16) as u8, (v >> 8) as u8, v as u8)),
        _ => None,
    }
}

/// The default named palette. Values follow the reference engine's
/// default (arne) palette; `gray` spellings are accepted everywhere.
fn named(word: &str) -> Option<Color> {
    let c = match word {
        "black" => (0x00, 0x00, 0x00),
        "white" => (0xff, 0xff, 0xff),
        "grey" | "gray" => (0x9d, 0x9d, 0x9d),
        "darkgrey" | "darkgray" => (0x69, 0x71, 0x75),
        "lightgrey" | "lightgray" => (0xcc, 0xcc, 0xcc),
        "red" => (0xbe, 0x26, 0x33),
        "darkred" => (0x73, 0x29, 0x30),
        "lightred" => (0xe0, 0x6f, 0x8b),
        "brown" => (0xa4, 0x64, 0x22),
        "darkbrown" => (0x49, 0x3c, 0x2b),
        "lightbrown" => (0xeb, 0x89, 0x31),
        "orange" => (0xeb, 0x89, 0x31),
        "yellow" => (0xf7, 0xe2, 0x6b),
        "green" => (0x44, 0x89, 0x1a),
        "darkgreen" => (0x2f, 0x48, 0x4e),
        "lightgreen" => (0xa3, 0xce, 0x27),
        "blue" => (0x28, 0x5c, 0xc4),
        "darkblue" => (0x1b, 0x26, 0x32),
        "lightblue" => (0x31, 0xa2, 0xf2),
        "purple" => (0x34, 0x2a, 0x97),
        "pink" => (0xe0, 0x6f, 0x8b),
        "transparent" => return Some(Color::Transparent),
        _ => return None,
    };
    Some(Color::Rgb(c.0, c.1, c.2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_and_hex() {
        assert_eq!(parse_color("black"), Some(Color::Rgb(0, 0, 0)));
        assert_eq!(parse_color("gray"), parse_color("grey"));
        assert_eq!(parse_color("#ff8000"), Some(Color::Rgb(255, 128, 0)));
        assert_eq!(parse_color("#f80"), Some(Color::Rgb(255, 136, 0)));
        assert_eq!(parse_color("transparent"), Some(Color::Transparent));
        assert_eq!(parse_color("notacolor"), None);
        assert_eq!(parse_color("#12"), None);
    }
}
