//! Static figures of one or more sets: binary PGM rasters and SVG.
//!
//! Sets on a line are drawn as stacked horizontal bands, one per set. Sets
//! in the plane are overlaid. Circle points are drawn at `(cos θ, sin θ)`.

use std::fmt::Write;

use crate::error::{invalid, Error, Result};
use crate::hyperspace::{same_space, CompactSet};
use crate::metric_space::Space;

#[derive(Debug, Clone, Copy)]
pub struct RenderParams {
    pub width: usize,
    pub height: usize,
}

impl Default for RenderParams {
    fn default() -> Self {
        RenderParams {
            width: 729,
            height: 729,
        }
    }
}

struct Frame {
    lo: [f64; 2],
    hi: [f64; 2],
    planar: bool,
}

fn frame(sets: &[CompactSet], params: &RenderParams) -> Result<Frame> {
    let first = match sets.first() {
        Some(s) => s,
        None => return invalid("nothing to render"),
    };
    if params.width < 2 || params.height < 2 {
        return invalid("image must be at least 2x2");
    }
    if sets.iter().any(|s| !same_space(s.space_arc(), first.space_arc())) {
        return invalid("all rendered sets must share a space");
    }
    match first.space() {
        Space::Circle => Ok(Frame {
            lo: [-1.0, -1.0],
            hi: [1.0, 1.0],
            planar: true,
        }),
        space => {
            let b = space.box_domain().expect("box space");
            match b.lower.len() {
                1 => Ok(Frame {
                    lo: [b.lower[0], 0.0],
                    hi: [b.upper[0], 1.0],
                    planar: false,
                }),
                2 => Ok(Frame {
                    lo: [b.lower[0], b.lower[1]],
                    hi: [b.upper[0], b.upper[1]],
                    planar: true,
                }),
                d => Err(Error::Unsupported(format!("cannot render dimension {d}"))),
            }
        }
    }
}

fn plane_xy(space: &Space, p: &[f64]) -> (f64, f64) {
    match space {
        Space::Circle => (p[0].cos(), p[0].sin()),
        _ => (p[0], p[1]),
    }
}

fn to_pixel(v: f64, lo: f64, hi: f64, n: usize) -> usize {
    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
    ((t * (n - 1) as f64).round().max(0.0) as usize).min(n - 1)
}

/// Band of rows `[top, bottom)` for layer `i` of `n` on a line.
fn band(i: usize, n: usize, height: usize) -> (usize, usize) {
    (i * height / n, ((i + 1) * height / n).max(i * height / n + 1))
}

/// Binary greyscale PGM: white background, points black.
pub fn render_pgm(sets: &[CompactSet], params: &RenderParams) -> Result<Vec<u8>> {
    let f = frame(sets, params)?;
    let (w, h) = (params.width, params.height);
    let mut pix = vec![255u8; w * h];
    for (i, set) in sets.iter().enumerate() {
        if f.planar {
            for p in set.points() {
                let (x, y) = plane_xy(set.space(), p);
                let col = to_pixel(x, f.lo[0], f.hi[0], w);
                let row = h - 1 - to_pixel(y, f.lo[1], f.hi[1], h);
                pix[row * w + col] = 0;
            }
        } else {
            let (top, bottom) = band(i, sets.len(), h);
            for p in set.points() {
                let col = to_pixel(p[0], f.lo[0], f.hi[0], w);
                for row in top..bottom {
                    pix[row * w + col] = 0;
                }
            }
        }
    }
    let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
    out.extend_from_slice(&pix);
    Ok(out)
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// SVG with one `<g>` layer per set.
pub fn render_svg(sets: &[CompactSet], params: &RenderParams) -> Result<String> {
    let f = frame(sets, params)?;
    let (w, h) = (params.width, params.height);
    let sx = |x: f64| (x - f.lo[0]) / (f.hi[0] - f.lo[0]) * (w - 1) as f64;
    let sy = |y: f64| (h - 1) as f64 - (y - f.lo[1]) / (f.hi[1] - f.lo[1]) * (h - 1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    for (i, set) in sets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<g id="layer-{i}" fill="{color}">"#);
        let band_y = if f.planar {
            0.0
        } else {
            let (top, bottom) = band(i, sets.len(), h);
            0.5 * (top + bottom) as f64
        };
        for p in set.points() {
            let (cx, cy) = if f.planar {
                let (x, y) = plane_xy(set.space(), p);
                (sx(x), sy(y))
            } else {
                (sx(p[0]), band_y)
            };
            let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="1"/>"#);
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::metric_space::Point;

    #[test]
    fn pgm_marks_point_columns() {
        let s = Arc::new(Space::interval(0.0, 1.0).unwrap());
        let a = CompactSet::new(s, 0.0, vec![Point::scalar(0.0).unwrap(), Point::scalar(0.5).unwrap()])
            .unwrap();
        let img = render_pgm(&[a], &RenderParams { width: 11, height: 3 }).unwrap();
        let header = b"P5\n11 3\n255\n";
        assert_eq!(&img[..header.len()], header);
        let pix = &img[header.len()..];
        for row in 0..3 {
            let dark: Vec<usize> = (0..11).filter(|&c| pix[row * 11 + c] == 0).collect();
            assert_eq!(dark, vec![0, 5]);
        }
    }

    #[test]
    fn rejects_empty_and_high_dimension() {
        assert!(matches!(render_pgm(&[], &RenderParams::default()), Err(Error::InvalidArgument(_))));
        let s = Arc::new(Space::euclidean(vec![0.0; 3], vec![1.0; 3]).unwrap());
        let a = CompactSet::singleton(s, Point::new(vec![0.5; 3]).unwrap()).unwrap();
        assert!(matches!(render_svg(&[a], &RenderParams::default()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn svg_has_one_layer_per_set() {
        let s = Arc::new(Space::euclidean(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap());
        let a = CompactSet::singleton(s.clone(), Point::new(vec![0.5, 0.5]).unwrap()).unwrap();
        let b = CompactSet::singleton(s, Point::new(vec![0.0, 1.0]).unwrap()).unwrap();
        let svg = render_svg(&[a, b], &RenderParams { width: 101, height: 101 }).unwrap();
        assert_eq!(svg.matches("<g id=").count(), 2);
        assert!(svg.contains(r#"cx="50.000" cy="50.000""#));
        assert!(svg.contains(r#"cx="0.000" cy="0.000""#));
    }
}
