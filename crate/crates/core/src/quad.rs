//! Adaptive Simpson quadrature over an interval, with caller-supplied split
//! points at known kinks so each sub-interval is smooth.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

const MAX_DEPTH: u32 = 48;

fn simpson<R: Real>(f: &mut impl FnMut(R) -> R, a: R, b: R) -> (R, R) {
    let two = lit::<R>(2.0);
    let m = (a + b) / two;
    let fm = f(m);
    let s = (b - a) / lit::<R>(6.0) * (f(a) + lit::<R>(4.0) * fm + f(b));
    (s, m)
}

fn adapt<R: Real>(
    f: &mut impl FnMut(R) -> R,
    a: R,
    b: R,
    whole: R,
    tol: R,
    depth: u32,
) -> Result<R> {
    let mid = (a + b) / lit::<R>(2.0);
    let (l, _) = simpson(f, a, mid);
    let (r, _) = simpson(f, mid, b);
    let err = (l + r - whole).abs();
    // The second clause accepts error estimates at machine-noise scale that
    // no amount of subdivision can shrink further.
    if err <= lit::<R>(15.0) * tol
        || err <= R::epsilon() * lit::<R>(32.0)
        || b - a <= R::epsilon() * lit::<R>(8.0)
    {
        return Ok(l + r + (l + r - whole) / lit::<R>(15.0));
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Convergence(format!(
            "simpson subdivision budget exhausted on [{a}, {b}], err {err}"
        )));
    }
    let half_tol = tol / lit::<R>(2.0);
    let lv = adapt(f, a, mid, l, half_tol, depth + 1)?;
    let rv = adapt(f, mid, b, r, half_tol, depth + 1)?;
    Ok(lv + rv)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`, splitting first
/// at the interior `breaks` (values outside `(a, b)` are ignored).
pub fn integrate<R: Real>(
    mut f: impl FnMut(R) -> R,
    a: R,
    b: R,
    breaks: &[R],
    tol: R,
) -> Result<R> {
    if !(tol > R::zero()) {
        return Err(Error::domain("quadrature tolerance must be positive"));
    }
    if b <= a {
        return Ok(R::zero());
    }
    let mut cuts: Vec<R> = breaks
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite cut points"));
    cuts.dedup_by(|x, y| (*x - *y).abs() <= R::epsilon() * lit::<R>(4.0));

    let total_len = b - a;
    let mut sum = R::zero();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let piece_tol = tol * (hi - lo) / total_len;
        let (whole, _) = simpson(&mut f, lo, hi);
        sum += adapt(&mut f, lo, hi, whole, piece_tol.max(R::epsilon()), 0)?;
    }
    Ok(sum)
}
