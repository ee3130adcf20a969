//! The `(a, b)` phase diagram for `p = n^-a`, `tau = n^-b`.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::inference::{Cell, SweepRecord};

/// Region of the phase diagram, from hardest (`A`) to easiest (`D`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    /// Beyond the information-theoretic threshold `1 - a - b = 0`.
    A,
    /// Between the information threshold and the detection line
    /// `3 - 3a - 4b = 0`.
    B,
    /// Between the detection line and the recovery line `1 - a - 2b = 0`.
    C,
    /// Below the recovery line.
    D,
}

impl Region {
    pub fn letter(self) -> char {
        match self {
            Region::A => 'A',
            Region::B => 'B',
            Region::C => 'C',
            Region::D => 'D',
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Region of `(a, b)`. Points on a boundary line go to the harder side.
pub fn region_label(a: f64, b: f64) -> Region {
    if 1.0 - a - b <= 0.0 {
        Region::A
    } else if 3.0 - 3.0 * a - 4.0 * b <= 0.0 {
        Region::B
    } else if 1.0 - a - 2.0 * b <= 0.0 {
        Region::C
    } else {
        Region::D
    }
}

/// Inclusive range `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self) -> Vec<f64> {
        let k = ((self.hi - self.lo) / self.step + 1e-9).floor() as usize;
        (0..=k).map(|i| self.lo + i as f64 * self.step).collect()
    }
}

/// Parses `a=lo:hi:step,b=lo:hi:step`.
pub fn parse_grid(spec: &str) -> Result<(Range, Range)> {
    let mut a = None;
    let mut b = None;
    for part in spec.split(',') {
        let (key, val) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("grid entry {part:?} is not key=lo:hi:step")))?;
        let nums: Vec<f64> = val
            .split(':')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {v:?}")))
            })
            .collect::<Result<_>>()?;
        let [lo, hi, step] = nums[..] else {
            return Err(Error::Parse(format!("grid range {val:?} needs lo:hi:step")));
        };
        if !(step > 0.0) || hi < lo {
            return Err(Error::Parse(format!("grid range {val:?} is empty")));
        }
        let r = Range { lo, hi, step };
        match key.trim() {
            "a" => a = Some(r),
            "b" => b = Some(r),
            k => return Err(Error::Parse(format!("unknown grid axis {k:?}"))),
        }
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::Parse("grid needs both a and b".into())),
    }
}

/// Cells `p = n^-a`, `tau = n^-b`, `q = p / rho` in row-major `(a, b)` order.
pub fn phase_cells(n: usize, a: &Range, b: &Range, rho: f64) -> Vec<Cell> {
    let nf = n as f64;
    a.values()
        .into_iter()
        .flat_map(|av| {
            b.values().into_iter().map(move |bv| {
                let p = nf.powf(-av);
                Cell {
                    n,
                    tau: nf.powf(-bv),
                    p,
                    q: p / rho,
                    a: Some(av),
                    b: Some(bv),
                }
            })
        })
        .collect()
}

/// Minimal SVG of the diagram: the three boundary lines and one square per
/// record, shaded by detection risk.
pub fn phase_svg(records: &[SweepRecord]) -> String {
    let size = 400.0;
    let (x, y) = (|a: f64| 40.0 + a * size, |b: f64| 20.0 + (1.0 - b) * size);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" font-family="sans-serif" font-size="12">"#,
        size + 60.0,
        size + 60.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{}" y="{}" width="{size}" height="{size}" fill="none" stroke="black"/>"#,
        x(0.0),
        y(1.0)
    );
    for r in records {
        let (Some(a), Some(b)) = (r.a, r.b) else {
            continue;
        };
        let fill = if r.detect_risk.is_finite() {
            let v = r.detect_risk.clamp(0.0, 1.0);
            format!(
                "rgb({},{},80)",
                (255.0 * v) as u8,
                (255.0 * (1.0 - v)) as u8
            )
        } else {
            "rgb(200,200,200)".into()
        };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="6" fill="{fill}"><title>a={a} b={b} risk={}</title></circle>"#,
            x(a),
            y(b),
            r.detect_risk
        );
    }
    for (b0, style) in [
        (1.0, r#"stroke="black""#),
        (0.75, r#"stroke="red" stroke-dasharray="2,2""#),
        (0.5, r#"stroke="blue" stroke-dasharray="6,3""#),
    ] {
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" {style} stroke-width="2"/>"#,
            x(0.0),
            y(b0),
            x(1.0),
            y(0.0)
        );
    }
    for (a, b, l) in [
        (0.6, 0.7, 'A'),
        (0.2, 0.7, 'B'),
        (0.2, 0.5, 'C'),
        (0.3, 0.2, 'D'),
    ] {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{l}</text>"#, x(a), y(b));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">a</text>"#,
        x(0.5),
        y(0.0) + 30.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}">b</text>"#,
        x(0.0) - 30.0,
        y(0.5)
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_regions() {
        assert_eq!(region_label(0.8, 0.8), Region::A);
        assert_eq!(region_label(0.1, 0.1), Region::D);
        assert_eq!(region_label(0.3, 0.5), Region::C);
        assert_eq!(region_label(0.2, 0.7), Region::B);
        // letter positions in the figure
        assert_eq!(region_label(0.6, 0.7), Region::A);
        assert_eq!(region_label(0.2, 0.5), Region::C);
        assert_eq!(region_label(0.3, 0.2), Region::D);
    }

    #[test]
    fn boundaries_go_to_harder_side() {
        assert_eq!(region_label(0.5, 0.5), Region::A);
        assert_eq!(region_label(0.0, 0.75), Region::B);
        assert_eq!(region_label(0.0, 0.5), Region::C);
    }

    #[test]
    fn grid_cells() {
        let (a, b) = parse_grid("a=0.1:0.9:0.1,b=0.1:0.9:0.1").unwrap();
        assert_eq!(a.values().len(), 9);
        let cells = phase_cells(400, &a, &b, 2.0);
        assert_eq!(cells.len(), 81);
        for c in &cells {
            assert!((c.p - 400f64.powf(-c.a.unwrap())).abs() < 1e-12);
            assert!((c.tau - 400f64.powf(-c.b.unwrap())).abs() < 1e-12);
        }
        assert!(parse_grid("a=0.1:0.9").is_err());
        assert!(parse_grid("a=0.1:0.9:0.1").is_err());
        assert!(parse_grid("a=0.5:0.1:0.1,b=0.1:0.2:0.1").is_err());
    }

    #[test]
    fn every_point_gets_one_label() {
        let mut seen = std::collections::HashSet::new();
        for i in 1..100 {
            for j in 1..100 {
                seen.insert(region_label(i as f64 / 100.0, j as f64 / 100.0));
            }
        }
        assert_eq!(seen.len(), 4);
    }
}
