//! Exact sign of `a - b + w k` for finite doubles and an integer `k`.

use std::cmp::Ordering;

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Sign of the exact sum of `terms`, via a nonoverlapping expansion.
fn expansion_sign(terms: [f64; 4]) -> Ordering {
    let mut e = [0.0f64; 8];
    let mut len = 0;
    for t in terms {
        let mut q = t;
        let mut out = [0.0f64; 8];
        let mut olen = 0;
        for &h in &e[..len] {
            let (s, err) = two_sum(q, h);
            if err != 0.0 {
                out[olen] = err;
                olen += 1;
            }
            q = s;
        }
        if q != 0.0 {
            out[olen] = q;
            olen += 1;
        }
        e = out;
        len = olen;
    }
    if len == 0 {
        Ordering::Equal
    } else {
        e[len - 1].partial_cmp(&0.0).unwrap()
    }
}

/// Compares `a + w·da` with `b + w·db` exactly.
pub(crate) fn cmp_cost(a: f64, da: i64, b: f64, db: i64, w: f64) -> Ordering {
    let k = (da - db) as f64;
    let wk = w * k;
    let approx = (a - b) + wk;
    let bound = 4.0 * f64::EPSILON * (a.abs() + b.abs() + wk.abs());
    if approx > bound {
        return Ordering::Greater;
    }
    if approx < -bound {
        return Ordering::Less;
    }
    let (p, pe) = two_prod(w, k);
    expansion_sign([a, -b, p, pe])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_rounding_ties() {
        // 0.1 + 0.2 != 0.3 in floating point, but the exact sums differ too
        assert_eq!(cmp_cost(0.1, 0, 0.3, 0, 0.2), Ordering::Less);
        assert_eq!(cmp_cost(1.0, 1, 1.5, 0, 0.5), Ordering::Equal);
        assert_eq!(cmp_cost(1e16, 1, 1e16 + 2.0, 0, 1.0), Ordering::Less);
        assert_eq!(cmp_cost(1e16, 3, 1e16 + 2.0, 0, 1.0), Ordering::Greater);
        assert_eq!(cmp_cost(-0.0, 0, 0.0, 0, 1.0), Ordering::Equal);
    }
}
