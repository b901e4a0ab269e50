//! Color parsing, sRGB to CIE Lab conversion, CIEDE2000 and color-set
//! fidelity.

mod css;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::assignment;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unparsable color: {0:?}")]
pub struct UnparsableColor(pub String);

/// An 8-bit sRGB color with straight alpha in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorValue {
    pub r: u8,
    pub g: u8,
    pub b: u8,
    pub alpha: f64,
}

impl ColorValue {
    pub const BLACK: ColorValue = ColorValue::rgb(0, 0, 0);
    pub const WHITE: ColorValue = ColorValue::rgb(255, 255, 255);

    pub const fn rgb(r: u8, g: u8, b: u8) -> Self {
        ColorValue { r, g, b, alpha: 1.0 }
    }

    pub fn hex(&self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }

    pub fn to_lab(&self) -> LabColor {
        srgb_to_lab(*self)
    }

    /// WCAG relative luminance of the linearized sRGB components.
    pub fn relative_luminance(&self) -> f64 {
        let [r, g, b] = self.linear_rgb();
        0.2126 * r + 0.7152 * g + 0.0722 * b
    }

    fn linear_rgb(&self) -> [f64; 3] {
        [self.r, self.g, self.b].map(|c| srgb_channel_to_linear(c as f64 / 255.0))
    }

    pub fn to_hsv(&self) -> Hsv {
        let r = self.r as f64 / 255.0;
        let g = self.g as f64 / 255.0;
        let b = self.b as f64 / 255.0;
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let d = max - min;
        let h = if d == 0.0 {
            0.0
        } else if max == r {
            ((g - b) / d).rem_euclid(6.0) / 6.0
        } else if max == g {
            ((b - r) / d + 2.0) / 6.0
        } else {
            ((r - g) / d + 4.0) / 6.0
        };
        let s = if max == 0.0 { 0.0 } else { d / max };
        Hsv { h: h.rem_euclid(1.0), s, v: max }
    }

    pub fn from_hsv(hsv: Hsv) -> Self {
        let h = hsv.h.rem_euclid(1.0) * 6.0;
        let s = hsv.s.clamp(0.0, 1.0);
        let v = hsv.v.clamp(0.0, 1.0);
        let c = v * s;
        let x = c * (1.0 - (h % 2.0 - 1.0).abs());
        let (r, g, b) = match h as u32 {
            0 => (c, x, 0.0),
            1 => (x, c, 0.0),
            2 => (0.0, c, x),
            3 => (0.0, x, c),
            4 => (x, 0.0, c),
            _ => (c, 0.0, x),
        };
        let m = v - c;
        let q = |u: f64| ((u + m) * 255.0).round().clamp(0.0, 255.0) as u8;
        ColorValue::rgb(q(r), q(g), q(b))
    }
}

impl fmt::Display for ColorValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alpha >= 1.0 {
            f.write_str(&self.hex())
        } else {
            write!(f, "rgba({}, {}, {}, {})", self.r, self.g, self.b, self.alpha)
        }
    }
}

impl FromStr for ColorValue {
    type Err = UnparsableColor;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_color(s)
    }
}

impl Serialize for ColorValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ColorValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_color(&s).map_err(serde::de::Error::custom)
    }
}

/// Hue, saturation and value, each in `[0, 1]` (hue wraps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

/// Parse `#RRGGBB`, `#RGB`, `rgb(r,g,b)`, `rgba(r,g,b,a)` or a CSS color
/// name (case-insensitive).
pub fn parse_color(text: &str) -> Result<ColorValue, UnparsableColor> {
    let err = || UnparsableColor(text.to_string());
    let s = text.trim().to_ascii_lowercase();

    if let Some(hex) = s.strip_prefix('#') {
        let digits: Vec<u8> = hex
            .chars()
            .map(|c| c.to_digit(16).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(err)?;
        return match digits.as_slice() {
            [r, g, b] => Ok(ColorValue::rgb(r * 17, g * 17, b * 17)),
            [r1, r0, g1, g0, b1, b0] => {
                Ok(ColorValue::rgb(r1 * 16 + r0, g1 * 16 + g0, b1 * 16 + b0))
            }
            _ => Err(err()),
        };
    }

    let functional = s
        .strip_prefix("rgba(")
        .map(|rest| (rest, true))
        .or_else(|| s.strip_prefix("rgb(").map(|rest| (rest, false)));
    if let Some((rest, has_alpha)) = functional {
        let body = rest.strip_suffix(')').ok_or_else(err)?;
        let parts: Vec<f64> = body
            .split(',')
            .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(err)?;
        let expected = if has_alpha { 4 } else { 3 };
        if parts.len() != expected || parts[..3].iter().any(|c| !(0.0..=255.0).contains(c)) {
            return Err(err());
        }
        let alpha = if has_alpha { parts[3] } else { 1.0 };
        if !(0.0..=1.0).contains(&alpha) {
            return Err(err());
        }
        let ch = |v: f64| v.round() as u8;
        return Ok(ColorValue { r: ch(parts[0]), g: ch(parts[1]), b: ch(parts[2]), alpha });
    }

    css::CSS_NAMED_COLORS
        .binary_search_by(|(name, _)| (*name).cmp(s.as_str()))
        .map(|i| {
            let [r, g, b] = css::CSS_NAMED_COLORS[i].1;
            ColorValue::rgb(r, g, b)
        })
        .map_err(|_| err())
}

/// CIE L*a*b* under D65 / 2°.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        LabColor { l, a, b }
    }
}

// D65 reference white, consistent with the row sums of the sRGB matrix.
const WHITE_X: f64 = 0.950_47;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.088_83;

fn srgb_channel_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const EPS: f64 = 216.0 / 24389.0;
    const KAPPA: f64 = 24389.0 / 27.0;
    if t > EPS {
        t.cbrt()
    } else {
        (KAPPA * t + 16.0) / 116.0
    }
}

/// sRGB -> linear RGB -> XYZ -> Lab. Alpha is ignored.
pub fn srgb_to_lab(c: ColorValue) -> LabColor {
    let [r, g, b] = c.linear_rgb();
    let x = 0.412_456_4 * r + 0.357_576_1 * g + 0.180_437_5 * b;
    let y = 0.212_672_9 * r + 0.715_152_2 * g + 0.072_175_0 * b;
    let z = 0.019_333_9 * r + 0.119_192_0 * g + 0.950_304_1 * b;
    let fx = lab_f(x / WHITE_X);
    let fy = lab_f(y / WHITE_Y);
    let fz = lab_f(z / WHITE_Z);
    LabColor {
        l: (116.0 * fy - 16.0).clamp(0.0, 100.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// A CIEDE2000 color difference.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ColorDelta {
    pub delta_e: f64,
}

/// CIEDE2000 with unit weighting factors (kL = kC = kH = 1).
pub fn delta_e_2000(x: LabColor, y: LabColor) -> ColorDelta {
    const POW25_7: f64 = 6_103_515_625.0; // 25^7

    let c1 = x.a.hypot(x.b);
    let c2 = y.a.hypot(y.b);
    let c_bar7 = ((c1 + c2) / 2.0).powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * x.a;
    let a2p = (1.0 + g) * y.a;
    let c1p = a1p.hypot(x.b);
    let c2p = a2p.hypot(y.b);
    let hue = |b: f64, ap: f64| {
        if b == 0.0 && ap == 0.0 {
            0.0
        } else {
            b.atan2(ap).to_degrees().rem_euclid(360.0)
        }
    };
    let h1p = hue(x.b, a1p);
    let h2p = hue(y.b, a2p);

    let dl = y.l - x.l;
    let dc = c2p - c1p;
    let chroma_product = c1p * c2p;
    let dh_angle = if chroma_product == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > 180.0 {
            d - 360.0
        } else if d < -180.0 {
            d + 360.0
        } else {
            d
        }
    };
    let dh = 2.0 * chroma_product.sqrt() * (dh_angle / 2.0).to_radians().sin();

    let l_bar = (x.l + y.l) / 2.0;
    let c_bar_p = (c1p + c2p) / 2.0;
    let h_bar_p = if chroma_product == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= 180.0 {
        (h1p + h2p) / 2.0
    } else if h1p + h2p < 360.0 {
        (h1p + h2p + 360.0) / 2.0
    } else {
        (h1p + h2p - 360.0) / 2.0
    };

    let cos_deg = |d: f64| d.to_radians().cos();
    let t = 1.0 - 0.17 * cos_deg(h_bar_p - 30.0)
        + 0.24 * cos_deg(2.0 * h_bar_p)
        + 0.32 * cos_deg(3.0 * h_bar_p + 6.0)
        - 0.20 * cos_deg(4.0 * h_bar_p - 63.0);
    let d_theta = 30.0 * (-((h_bar_p - 275.0) / 25.0).powi(2)).exp();
    let c_bar_p7 = c_bar_p.powi(7);
    let r_c = 2.0 * (c_bar_p7 / (c_bar_p7 + POW25_7)).sqrt();
    let l50 = (l_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * l50 / (20.0 + l50).sqrt();
    let s_c = 1.0 + 0.045 * c_bar_p;
    let s_h = 1.0 + 0.015 * c_bar_p * t;
    let r_t = -(2.0 * d_theta).to_radians().sin() * r_c;

    let tl = dl / s_l;
    let tc = dc / s_c;
    let th = dh / s_h;
    let sq = tl * tl + tc * tc + th * th + r_t * tc * th;
    ColorDelta { delta_e: sq.max(0.0).sqrt() }
}

pub fn color_distance(a: ColorValue, b: ColorValue) -> f64 {
    delta_e_2000(a.to_lab(), b.to_lab()).delta_e
}

/// Pairing penalty for a color with no counterpart; also the cap on any
/// pair's cost.
pub const MAX_COLOR_PENALTY: f64 = 100.0;

/// Capped CIEDE2000 cost matrix, padded to square with the maximum
/// penalty. Rows are generated colors.
pub fn color_cost_matrix(gen: &[ColorValue], reference: &[ColorValue]) -> Vec<Vec<f64>> {
    let n = gen.len().max(reference.len());
    let gen_lab: Vec<LabColor> = gen.iter().map(ColorValue::to_lab).collect();
    let ref_lab: Vec<LabColor> = reference.iter().map(ColorValue::to_lab).collect();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match (gen_lab.get(i), ref_lab.get(j)) {
                    (Some(&g), Some(&r)) => delta_e_2000(g, r).delta_e.min(MAX_COLOR_PENALTY),
                    _ => MAX_COLOR_PENALTY,
                })
                .collect()
        })
        .collect()
}

/// Optimal-assignment color agreement in `[0, 1]`.
///
/// Pairs generated and reference colors to minimize total capped ΔE00;
/// each pair scores `1 - ΔE/100` and the score is the mean over the
/// padded size, so missing or surplus colors count as zero.
pub fn color_set_fidelity(gen: &[ColorValue], reference: &[ColorValue]) -> f64 {
    let n = gen.len().max(reference.len());
    if n == 0 {
        return 1.0;
    }
    let cost = color_cost_matrix(gen, reference);
    let total = assignment::solve(&cost).total_cost;
    (1.0 - total / (MAX_COLOR_PENALTY * n as f64)).clamp(0.0, 1.0)
}

/// Sample a continuous color scale at `n` evenly spaced positions,
/// interpolating linearly in sRGB between stops.
pub fn sample_colorscale(stops: &[(f64, ColorValue)], n: usize) -> Vec<ColorValue> {
    if stops.is_empty() || n == 0 {
        return Vec::new();
    }
    let mut sorted = stops.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let at = |t: f64| -> ColorValue {
        let hi = sorted.iter().position(|s| s.0 >= t).unwrap_or(sorted.len() - 1);
        if hi == 0 {
            return sorted[0].1;
        }
        let (p0, c0) = sorted[hi - 1];
        let (p1, c1) = sorted[hi];
        if t >= p1 || p1 <= p0 {
            return c1;
        }
        let w = (t - p0) / (p1 - p0);
        let mix = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * w).round() as u8;
        ColorValue {
            r: mix(c0.r, c1.r),
            g: mix(c0.g, c1.g),
            b: mix(c0.b, c1.b),
            alpha: c0.alpha + (c1.alpha - c0.alpha) * w,
        }
    };
    if n == 1 {
        return vec![at(0.0)];
    }
    (0..n).map(|k| at(k as f64 / (n - 1) as f64)).collect()
}

/// Stops for a few common named color scales.
pub fn named_colorscale(name: &str) -> Option<Vec<(f64, ColorValue)>> {
    let hexes: &[&str] = match name.to_ascii_lowercase().as_str() {
        "viridis" => &["#440154", "#3b528b", "#21918c", "#5ec962", "#fde725"],
        "cividis" => &["#00224e", "#414d6b", "#7c7b78", "#bcaf6f", "#fee838"],
        "plasma" => &["#0d0887", "#7e03a8", "#cc4778", "#f89540", "#f0f921"],
        "greys" => &["#000000", "#ffffff"],
        "blues" => &["#08306b", "#f7fbff"],
        "reds" => &["#67000d", "#fff5f0"],
        "rdbu" => &["#053061", "#f7f7f7", "#67001f"],
        "jet" => &["#000083", "#003caa", "#05ffff", "#ffff00", "#fa0000", "#800000"],
        _ => return None,
    };
    let last = (hexes.len() - 1) as f64;
    Some(
        hexes
            .iter()
            .enumerate()
            .map(|(i, h)| (i as f64 / last, parse_color(h).expect("valid builtin hex")))
            .collect(),
    )
}

/// Number of stops taken from a continuous color scale.
pub const COLORSCALE_SAMPLES: usize = 5;
