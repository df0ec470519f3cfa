//! Lower convex hull of exact rational support points, shared by the Newton
//! polygon and the extension-construction certificate check.

use std::cmp::Ordering;

use crate::valgroup::{rat_int, Rat};

fn lex_cmp(a: &[Rat], b: &[Rat]) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.cmp(y) {
            Ordering::Equal => continue,
            ord => return ord,
        }
    }
    Ordering::Equal
}

fn scale(v: &[Rat], k: i64) -> Vec<Rat> {
    let k = rat_int(k);
    v.iter().map(|x| x * &k).collect()
}

fn sub(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// Vertices of the lower convex hull of `points` (abscissas strictly
/// increasing, ordinates rational vectors compared lexicographically).
/// Collinear interior points are dropped.
pub fn lower_hull_vertices(points: &[(usize, Vec<Rat>)]) -> Vec<(usize, Vec<Rat>)> {
    let mut hull: Vec<(usize, Vec<Rat>)> = Vec::new();
    for p in points {
        while hull.len() >= 2 {
            let a = &hull[hull.len() - 2];
            let b = &hull[hull.len() - 1];
            // keep b only if it lies strictly below the chord a--p:
            // (vb - va)*(ip - ia) < (vp - va)*(ib - ia), scaled positively
            let lhs = scale(&sub(&b.1, &a.1), (p.0 - a.0) as i64);
            let rhs = scale(&sub(&p.1, &a.1), (b.0 - a.0) as i64);
            if lex_cmp(&lhs, &rhs) == Ordering::Less {
                break;
            }
            hull.pop();
        }
        hull.push(p.clone());
    }
    hull
}

/// Hull segments as `(slope, multiplicity)` where the reported slope of a
/// segment from `(i1, v1)` to `(i2, v2)` is `(v1 - v2)/(i2 - i1)`: with this
/// convention the slopes are exactly the root values. Segments come out in
/// decreasing slope order (left to right along the hull).
pub fn lower_hull(points: &[(usize, Vec<Rat>)]) -> Vec<(Vec<Rat>, usize)> {
    let hull = lower_hull_vertices(points);
    hull.windows(2)
        .map(|w| {
            let (i1, v1) = &w[0];
            let (i2, v2) = &w[1];
            let run = rat_int((i2 - i1) as i64);
            let slope = sub(v1, v2).iter().map(|x| x / &run).collect();
            (slope, i2 - i1)
        })
        .collect()
}
