//! Uniform sampling of ordered mark vectors.
//!
//! The target is the uniform distribution on
//! `{ d : lo_k <= d_k <= hi_k, d_1 >= d_2 >= ... >= d_K }`.
//! Draws come from rejection of independent uniforms on the box. When the
//! ordered region is a tiny fraction of the box (large `K`, loose bounds) the
//! rejection loop is capped and the draw falls back to exact sequential
//! sampling from the conditional marginals, which are piecewise polynomials.

use rand::Rng;

use crate::error::{Error, Result};
use crate::mpp::CONSTRAINT_SLACK;

/// Rejected draws tolerated before switching to sequential sampling.
pub const MAX_REJECTIONS: usize = 10_000;

/// Outcome of one mark vector draw.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkDraw {
    pub marks: Vec<f64>,
    /// Independent-uniform proposals used (including the accepted one).
    pub tries: usize,
    pub fallback: bool,
}

/// Tightens a box using the ordering: `hi_k <= hi_{k-1}` and `lo_k >= lo_{k+1}`.
/// The ordered region is unchanged.
pub fn tighten(lo: &[f64], hi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::invalid("bound vectors must be non-empty and equally long"));
    }
    let mut lo = lo.to_vec();
    let mut hi = hi.to_vec();
    for k in 1..hi.len() {
        hi[k] = hi[k].min(hi[k - 1]);
    }
    for k in (0..lo.len() - 1).rev() {
        lo[k] = lo[k].max(lo[k + 1]);
    }
    for k in 0..lo.len() {
        if lo[k] > hi[k] {
            if lo[k] - hi[k] <= CONSTRAINT_SLACK {
                hi[k] = lo[k];
            } else {
                return Err(Error::EmptyRegion(format!(
                    "level {}: lower {} above upper {}",
                    k + 1,
                    lo[k],
                    hi[k]
                )));
            }
        }
    }
    Ok((lo, hi))
}

/// Draws a uniformly distributed non-increasing vector inside `[lo, hi]`.
pub fn sample_ordered<R: Rng + ?Sized>(lo: &[f64], hi: &[f64], rng: &mut R) -> Result<MarkDraw> {
    sample_ordered_capped(lo, hi, MAX_REJECTIONS, rng)
}

pub fn sample_ordered_capped<R: Rng + ?Sized>(
    lo: &[f64],
    hi: &[f64],
    max_rejections: usize,
    rng: &mut R,
) -> Result<MarkDraw> {
    let (lo, hi) = tighten(lo, hi)?;
    let mut marks = vec![0.0; lo.len()];
    for attempt in 1..=max_rejections {
        for k in 0..lo.len() {
            let w = hi[k] - lo[k];
            marks[k] = if w > 0.0 { lo[k] + w * rng.random::<f64>() } else { lo[k] };
        }
        if marks.windows(2).all(|w| w[0] >= w[1]) {
            return Ok(MarkDraw { marks, tries: attempt, fallback: false });
        }
    }
    let marks = OrderedRegion::new(&lo, &hi).sample(rng);
    Ok(MarkDraw { marks, tries: max_rejections, fallback: true })
}

/// Lebesgue measure of the ordered region inside the box, counting only
/// levels with non-degenerate bounds.
pub fn region_volume(lo: &[f64], hi: &[f64]) -> Result<f64> {
    let (lo, hi) = tighten(lo, hi)?;
    Ok(OrderedRegion::new(&lo, &hi).volume())
}

/// Polynomial in a local variable `u = t - origin`, coefficients ascending.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    /// Antiderivative vanishing at `u = 0`, plus a constant.
    fn integral(&self, constant: f64) -> Poly {
        let mut c = Vec::with_capacity(self.0.len() + 1);
        c.push(constant);
        for (i, &a) in self.0.iter().enumerate() {
            c.push(a / (i + 1) as f64);
        }
        Poly(c)
    }
}

/// Piecewise polynomial on shared breakpoints; constant beyond the last one
/// and zero before the first.
#[derive(Clone, Debug)]
struct Piecewise {
    pieces: Vec<Poly>,
    tail: f64,
}

impl Piecewise {
    fn eval(&self, breaks: &[f64], t: f64) -> f64 {
        if t < breaks[0] {
            return 0.0;
        }
        if t >= breaks[breaks.len() - 1] {
            return self.tail;
        }
        let j = breaks.partition_point(|&b| b <= t) - 1;
        self.pieces[j].eval(t - breaks[j])
    }
}

/// Segment of consecutive free levels with their cumulative volume functions.
struct Segment {
    start: usize,
    breaks: Vec<f64>,
    // cumulative[i] is W for level start + i: W(t) = measure of the levels
    // from that one downward given the level above sits at t.
    cumulative: Vec<Piecewise>,
}

struct OrderedRegion {
    lo: Vec<f64>,
    hi: Vec<f64>,
    segments: Vec<Segment>,
}

impl OrderedRegion {
    /// `lo`/`hi` must already be tightened.
    fn new(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut segments = Vec::new();
        let mut k = 0;
        while k < n {
            if hi[k] <= lo[k] {
                k += 1;
                continue;
            }
            let start = k;
            while k < n && hi[k] > lo[k] {
                k += 1;
            }
            segments.push(Self::build_segment(&lo[start..k], &hi[start..k], start));
        }
        Self { lo: lo.to_vec(), hi: hi.to_vec(), segments }
    }

    fn build_segment(lo: &[f64], hi: &[f64], start: usize) -> Segment {
        let mut breaks: Vec<f64> = lo.iter().chain(hi).copied().collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let pieces = breaks.len() - 1;
        // W for the (virtual) level below the segment is identically one.
        let mut below = Piecewise { pieces: vec![Poly(vec![1.0]); pieces], tail: 1.0 };
        let mut cumulative = vec![below.clone(); lo.len()];
        for i in (0..lo.len()).rev() {
            let mut out = Vec::with_capacity(pieces);
            let mut acc = 0.0;
            for j in 0..pieces {
                let (a, b) = (breaks[j], breaks[j + 1]);
                if b <= lo[i] {
                    out.push(Poly(vec![0.0]));
                } else if a >= hi[i] {
                    out.push(Poly(vec![acc]));
                } else {
                    let p = below.pieces[j].integral(acc);
                    acc = p.eval(b - a);
                    out.push(p);
                }
            }
            below = Piecewise { pieces: out, tail: acc };
            cumulative[i] = below.clone();
        }
        Segment { start, breaks, cumulative }
    }

    fn volume(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| s.cumulative[0].tail)
            .product()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut marks = self.lo.clone();
        for seg in &self.segments {
            let mut cap = self.hi[seg.start];
            for (i, w) in seg.cumulative.iter().enumerate() {
                let k = seg.start + i;
                let cap_k = cap.min(self.hi[k]);
                let total = w.eval(&seg.breaks, cap_k);
                let value = if total > 0.0 && cap_k > self.lo[k] {
                    let target = total * rng.random::<f64>();
                    let (mut a, mut b) = (self.lo[k], cap_k);
                    for _ in 0..200 {
                        let mid = 0.5 * (a + b);
                        if mid <= a || mid >= b {
                            break;
                        }
                        if w.eval(&seg.breaks, mid) < target {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    0.5 * (a + b)
                } else {
                    self.lo[k]
                };
                marks[k] = value;
                cap = value;
            }
        }
        marks
    }
}
