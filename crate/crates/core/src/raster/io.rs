use super::contour::BoundaryPolygons;
use super::mask::BinaryMask;
use crate::error::Result;
use crate::geom::Vec2;
use std::fmt::Write as _;
use std::io::Write;

/// One path per loop, filled with the even-odd rule; y axis flipped for display.
pub fn to_svg(polys: &BoundaryPolygons) -> String {
    to_svg_highlight(polys, |_| false)
}

/// [`to_svg`] with runs of boundary vertices satisfying `mark` stroked in red.
pub fn to_svg_highlight(polys: &BoundaryPolygons, mark: impl Fn(Vec2) -> bool) -> String {
    let mut pts = polys.loops.iter().flat_map(|l| l.points.iter());
    let Some(first) = pts.next() else {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\"/>\n".to_string();
    };
    let (mut x0, mut y0, mut x1, mut y1) = (first.x, first.y, first.x, first.y);
    for p in pts {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let pad = 0.02 * (x1 - x0).max(y1 - y0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        x0 - pad,
        -y1 - pad,
        x1 - x0 + 2.0 * pad,
        y1 - y0 + 2.0 * pad
    );
    let _ = writeln!(
        s,
        "<g fill=\"#4a6fa5\" fill-rule=\"evenodd\" stroke=\"none\">"
    );
    s.push_str("<path d=\"");
    for l in &polys.loops {
        for (k, p) in l.points.iter().enumerate() {
            let _ = write!(
                s,
                "{}{:.7} {:.7} ",
                if k == 0 { "M" } else { "L" },
                p.x,
                -p.y
            );
        }
        s.push_str("Z ");
    }
    s.push_str("\"/>\n</g>\n");
    let stroke = 0.004 * (x1 - x0).max(y1 - y0);
    let _ = writeln!(
        s,
        "<g fill=\"none\" stroke=\"#d62728\" stroke-width=\"{stroke:.6}\">"
    );
    for l in &polys.loops {
        let n = l.points.len();
        let marked: Vec<bool> = l.points.iter().map(|&p| mark(p)).collect();
        let Some(start) = (0..n).find(|&k| !marked[k]) else {
            if n > 0 {
                s.push_str("<path d=\"");
                for (k, p) in l.points.iter().enumerate() {
                    let _ = write!(
                        s,
                        "{}{:.7} {:.7} ",
                        if k == 0 { "M" } else { "L" },
                        p.x,
                        -p.y
                    );
                }
                s.push_str("Z\"/>\n");
            }
            continue;
        };
        let mut run: Vec<Vec2> = Vec::new();
        for step in 1..=n {
            let k = (start + step) % n;
            if marked[k] {
                run.push(l.points[k]);
            }
            if (!marked[k] || step == n) && !run.is_empty() {
                s.push_str("<path d=\"");
                for (j, p) in run.iter().enumerate() {
                    let _ = write!(
                        s,
                        "{}{:.7} {:.7} ",
                        if j == 0 { "M" } else { "L" },
                        p.x,
                        -p.y
                    );
                }
                s.push_str("\"/>\n");
                run.clear();
            }
        }
    }
    s.push_str("</g>\n</svg>\n");
    s
}

/// Binary PGM (P5) of the mask, set cells black, top row first.
pub fn write_pgm(mask: &BinaryMask, out: &mut impl Write) -> Result<()> {
    let (w, h) = (mask.grid.width, mask.grid.height);
    write!(out, "P5\n{w} {h}\n255\n")?;
    let mut row = vec![0u8; w];
    for j in (0..h as i64).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = if mask.get(i as i64, j) { 0 } else { 255 };
        }
        out.write_all(&row)?;
    }
    Ok(())
}
