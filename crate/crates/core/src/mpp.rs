//! Marked point process configurations on the union of covariate subspaces.
//!
//! Every non-empty subset of the `p` covariates carries its own homogeneous
//! Poisson process. A point born in subspace `i` is stored by its *completed*
//! location in `[0,1]^p`, with coordinates outside the subset fixed at zero, and
//! an ordered mark vector of `K` levels. Together with a fixed point at the
//! origin, the points generate the step surfaces
//!
//! ```text
//! lambda_k(x) = max { delta_k(xi) : xi <= x componentwise }
//! ```
//!
//! which are non-decreasing in `x` and non-increasing in `k` whenever the
//! configuration is valid (see [`Configuration::validate`]).
//!
//! Levels are 1-based throughout the public API (`1..=K`), matching ordinal
//! category labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest covariate count accepted by [`enumerate_subspaces`].
pub const DEFAULT_MAX_COVARIATES: usize = 12;

/// Absolute slack used when checking ordering constraints.
pub const CONSTRAINT_SLACK: f64 = 1e-12;

/// Closed interval `[lower, upper]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower > upper {
            return Err(Error::invalid(format!("bad interval [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub const fn unit() -> Self {
        Self {
            lower: 0.0,
            upper: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.lower - CONSTRAINT_SLACK && value <= self.upper + CONSTRAINT_SLACK
    }
}

/// A non-empty subset of covariates, stored as a bit mask over 0-based indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubspaceId(u32);

impl SubspaceId {
    pub fn from_mask(mask: u32) -> Result<Self> {
        if mask == 0 {
            return Err(Error::invalid("subspace mask must be non-empty"));
        }
        Ok(Self(mask))
    }

    /// Subspace spanned by the given 0-based covariate indices.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &j in indices {
            if j >= 32 {
                return Err(Error::invalid(format!("covariate index {j} out of range")));
            }
            mask |= 1 << j;
        }
        Self::from_mask(mask)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    /// Whether 0-based covariate `j` is active in this subspace.
    pub fn contains(self, j: usize) -> bool {
        j < 32 && self.0 & (1 << j) != 0
    }

    pub fn dimension(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&j| self.0 & (1 << j) != 0)
    }

    /// Lebesgue measure of the subspace (a face of the unit hypercube).
    pub fn volume(self) -> f64 {
        1.0
    }
}

impl fmt::Display for SubspaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.indices().map(|j| (j + 1).to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// All `2^p - 1` subspaces, ordered by dimension and then lexicographically.
pub fn enumerate_subspaces(p: usize) -> Result<Vec<SubspaceId>> {
    enumerate_subspaces_with_limit(p, DEFAULT_MAX_COVARIATES)
}

pub fn enumerate_subspaces_with_limit(p: usize, max_covariates: usize) -> Result<Vec<SubspaceId>> {
    if p == 0 || p > max_covariates || p > 31 {
        return Err(Error::invalid(format!(
            "covariate count {p} outside 1..={}",
            max_covariates.min(31)
        )));
    }
    let mut ids: Vec<SubspaceId> = (1u32..(1u32 << p)).map(SubspaceId).collect();
    ids.sort_by_cached_key(|id| (id.dimension(), id.indices().collect::<Vec<_>>()));
    Ok(ids)
}

/// Componentwise order: true iff `lower[j] <= upper[j]` for every `j`.
pub fn dominates(lower: &[f64], upper: &[f64]) -> Result<bool> {
    if lower.len() != upper.len() {
        return Err(Error::invalid(format!(
            "location length mismatch: {} vs {}",
            lower.len(),
            upper.len()
        )));
    }
    Ok(weakly_below(lower, upper))
}

#[inline]
pub(crate) fn weakly_below(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

/// A support point: completed location plus its mark vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportPoint {
    pub subspace: SubspaceId,
    pub location: Vec<f64>,
    pub marks: Vec<f64>,
}

/// The fixed point at the origin; only its marks vary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginPoint {
    pub marks: Vec<f64>,
}

/// Identifies the point whose constraints are being queried.
#[derive(Clone, Copy, Debug)]
pub enum PointRef<'a> {
    Origin,
    Existing(usize),
    /// A location that is not (yet) part of the configuration.
    Proposed(&'a [f64]),
}

/// Location and marks of one generator of the envelope, used to describe edits.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub location: Vec<f64>,
    pub marks: Vec<f64>,
}

/// Generators leaving and entering the configuration in one edit.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Change {
    pub removed: Vec<Generator>,
    pub added: Vec<Generator>,
}

impl Change {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty() && self.added.is_empty()
    }
}

/// A local modification of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub enum Edit {
    Birth(SupportPoint),
    Death(usize),
    DeathBirth { victim: usize, point: SupportPoint },
    Move { index: usize, location: Vec<f64> },
    Marks { index: usize, marks: Vec<f64> },
    OriginMarks(Vec<f64>),
}

/// Token restoring the configuration to its state before an [`Edit`].
#[derive(Debug)]
pub struct Undo(UndoKind);

#[derive(Debug)]
enum UndoKind {
    Birth,
    Death { index: usize, point: SupportPoint },
    DeathBirth { index: usize, point: SupportPoint },
    Move { index: usize, location: Vec<f64> },
    Marks { index: usize, marks: Vec<f64> },
    Origin(Vec<f64>),
}

/// Which point a constraint violation refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointLabel {
    Origin,
    Point(usize),
}

impl fmt::Display for PointLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointLabel::Origin => write!(f, "origin"),
            PointLabel::Point(i) => write!(f, "point {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Shape { point: PointLabel, message: String },
    Location { point: PointLabel, coordinate: usize, value: f64 },
    Range { point: PointLabel, level: usize, value: f64 },
    PinnedTop { point: PointLabel, value: f64 },
    WithinPoint { point: PointLabel, level: usize, upper: f64, lower: f64 },
    CrossPoint { below: PointLabel, above: PointLabel, level: usize, below_value: f64, above_value: f64 },
    Intensity { subspace: SubspaceId, value: f64 },
    Count { subspace: SubspaceId, stored: usize, actual: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { point, message } => write!(f, "{point}: {message}"),
            Violation::Location { point, coordinate, value } => {
                write!(f, "{point}: coordinate {} has invalid value {value}", coordinate + 1)
            }
            Violation::Range { point, level, value } => {
                write!(f, "{point}: level {level} value {value} outside the level range")
            }
            Violation::PinnedTop { point, value } => {
                write!(f, "{point}: pinned level 1 has value {value}")
            }
            Violation::WithinPoint { point, level, upper, lower } => write!(
                f,
                "{point}: level {level} ({lower}) exceeds level {} ({upper})",
                level - 1
            ),
            Violation::CrossPoint { below, above, level, below_value, above_value } => write!(
                f,
                "level {level}: {below} ({below_value}) lies below {above} ({above_value}) but has a larger mark"
            ),
            Violation::Intensity { subspace, value } => {
                write!(f, "subspace {subspace}: intensity {value} is not positive")
            }
            Violation::Count { subspace, stored, actual } => {
                write!(f, "subspace {subspace}: stored count {stored}, actual {actual}")
            }
        }
    }
}

/// A full marked point configuration together with its process intensities.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    covariates: usize,
    levels: usize,
    range: Interval,
    pin_top: bool,
    subspaces: Vec<SubspaceId>,
    // mask -> position in `subspaces`
    slot: Vec<usize>,
    points: Vec<SupportPoint>,
    counts: Vec<usize>,
    intensities: Vec<f64>,
    origin: OriginPoint,
}

impl Configuration {
    /// Empty configuration with the given origin marks and unit intensities.
    ///
    /// With `pin_top` the first level of every mark vector is fixed at
    /// `range.upper` (the identity-link case, where `delta_1 = 1`).
    pub fn new(
        covariates: usize,
        levels: usize,
        range: Interval,
        pin_top: bool,
        origin_marks: Vec<f64>,
    ) -> Result<Self> {
        if levels < 2 {
            return Err(Error::invalid("at least two levels are required"));
        }
        if origin_marks.len() != levels {
            return Err(Error::invalid(format!(
                "origin has {} marks, expected {levels}",
                origin_marks.len()
            )));
        }
        let subspaces = enumerate_subspaces(covariates)?;
        let mut slot = vec![usize::MAX; 1usize << covariates];
        for (i, id) in subspaces.iter().enumerate() {
            slot[id.mask() as usize] = i;
        }
        let s = subspaces.len();
        Ok(Self {
            covariates,
            levels,
            range,
            pin_top,
            subspaces,
            slot,
            points: Vec::new(),
            counts: vec![0; s],
            intensities: vec![1.0; s],
            origin: OriginPoint { marks: origin_marks },
        })
    }

    /// Origin marks spread evenly over the range, decreasing in the level.
    pub fn evenly_spaced_marks(levels: usize, range: Interval) -> Vec<f64> {
        (0..levels)
            .map(|k| range.upper - range.width() * k as f64 / levels as f64)
            .collect()
    }

    pub fn covariates(&self) -> usize {
        self.covariates
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn range(&self) -> Interval {
        self.range
    }

    pub fn pins_top(&self) -> bool {
        self.pin_top
    }

    pub fn subspaces(&self) -> &[SubspaceId] {
        &self.subspaces
    }

    pub fn subspace_slot(&self, id: SubspaceId) -> Option<usize> {
        self.slot
            .get(id.mask() as usize)
            .copied()
            .filter(|&s| s != usize::MAX)
    }

    pub fn points(&self) -> &[SupportPoint] {
        &self.points
    }

    pub fn total_points(&self) -> usize {
        self.points.len()
    }

    /// `n(Delta_i)` for each subspace, in [`Configuration::subspaces`] order.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn set_intensity(&mut self, slot: usize, value: f64) {
        self.intensities[slot] = value;
    }

    pub fn origin(&self) -> &OriginPoint {
        &self.origin
    }

    /// Levels that are free to move (level 1 is excluded when pinned).
    pub fn free_levels(&self) -> std::ops::RangeInclusive<usize> {
        if self.pin_top {
            2..=self.levels
        } else {
            1..=self.levels
        }
    }

    /// Index of the `rank`-th point (0-based) belonging to subspace `slot`.
    pub fn nth_point_in(&self, slot: usize, rank: usize) -> Option<usize> {
        let id = self.subspaces[slot];
        self.points
            .iter()
            .enumerate()
            .filter(|(_, pt)| pt.subspace == id)
            .nth(rank)
            .map(|(i, _)| i)
    }

    fn check_shape(&self, point: &SupportPoint) -> Result<()> {
        if self.subspace_slot(point.subspace).is_none() {
            return Err(Error::invalid(format!("unknown subspace {}", point.subspace)));
        }
        self.check_location(point.subspace, &point.location)?;
        if point.marks.len() != self.levels {
            return Err(Error::invalid(format!(
                "point has {} marks, expected {}",
                point.marks.len(),
                self.levels
            )));
        }
        Ok(())
    }

    fn check_location(&self, subspace: SubspaceId, location: &[f64]) -> Result<()> {
        if location.len() != self.covariates {
            return Err(Error::invalid(format!(
                "location has {} coordinates, expected {}",
                location.len(),
                self.covariates
            )));
        }
        for (j, &v) in location.iter().enumerate() {
            let ok = if subspace.contains(j) {
                (0.0..=1.0).contains(&v)
            } else {
                v == 0.0
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "coordinate {} = {v} invalid for subspace {subspace}",
                    j + 1
                )));
            }
        }
        Ok(())
    }

    /// Inserts a point after shape checks only; ordering constraints are not
    /// enforced here (see [`Configuration::validate`]).
    pub fn push_point(&mut self, point: SupportPoint) -> Result<usize> {
        self.check_shape(&point)?;
        let slot = self.subspace_slot(point.subspace).expect("checked above");
        self.counts[slot] += 1;
        self.points.push(point);
        Ok(self.points.len() - 1)
    }

    pub fn remove_point(&mut self, index: usize) -> Result<SupportPoint> {
        if index >= self.points.len() {
            return Err(Error::invalid(format!("no point with index {index}")));
        }
        let point = self.points.remove(index);
        let slot = self.subspace_slot(point.subspace).expect("stored point");
        self.counts[slot] -= 1;
        Ok(point)
    }

    fn insert_point(&mut self, index: usize, point: SupportPoint) {
        let slot = self.subspace_slot(point.subspace).expect("stored point");
        self.counts[slot] += 1;
        self.points.insert(index, point);
    }

    pub fn set_marks(&mut self, index: usize, marks: Vec<f64>) -> Result<()> {
        if marks.len() != self.levels {
            return Err(Error::invalid("mark vector length mismatch"));
        }
        let pt = self
            .points
            .get_mut(index)
            .ok_or_else(|| Error::invalid(format!("no point with index {index}")))?;
        pt.marks = marks;
        Ok(())
    }

    pub fn set_origin_marks(&mut self, marks: Vec<f64>) -> Result<()> {
        if marks.len() != self.levels {
            return Err(Error::invalid("mark vector length mismatch"));
        }
        self.origin.marks = marks;
        Ok(())
    }

    /// `lambda_level(x)`: the largest level-`level` mark among points below `x`.
    pub fn evaluate_lambda(&self, x: &[f64], level: usize) -> Result<f64> {
        if x.len() != self.covariates {
            return Err(Error::invalid("location length mismatch"));
        }
        if level == 0 || level > self.levels {
            return Err(Error::invalid(format!("level {level} outside 1..={}", self.levels)));
        }
        let k = level - 1;
        Ok(self
            .points
            .iter()
            .filter(|pt| weakly_below(&pt.location, x))
            .fold(self.origin.marks[k], |acc, pt| acc.max(pt.marks[k])))
    }

    /// All `K` envelope values at `x`, written into `out`.
    pub fn envelope_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.origin.marks);
        for pt in &self.points {
            if weakly_below(&pt.location, x) {
                for (o, &m) in out.iter_mut().zip(&pt.marks) {
                    if m > *o {
                        *o = m;
                    }
                }
            }
        }
    }

    pub fn envelope(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.levels];
        self.envelope_into(x, &mut out);
        out
    }

    /// Per-level bounds imposed on a mark vector at `location` by every other
    /// generator, intersected with the level range (and the pinned top level).
    pub fn mark_box(&self, target: PointRef<'_>) -> Result<(Vec<f64>, Vec<f64>)> {
        let zeros;
        let (location, skip_point, skip_origin): (&[f64], Option<usize>, bool) = match target {
            PointRef::Origin => {
                zeros = vec![0.0; self.covariates];
                (&zeros, None, true)
            }
            PointRef::Existing(i) => {
                let pt = self
                    .points
                    .get(i)
                    .ok_or_else(|| Error::invalid(format!("no point with index {i}")))?;
                (&pt.location, Some(i), false)
            }
            PointRef::Proposed(loc) => {
                if loc.len() != self.covariates {
                    return Err(Error::invalid("location length mismatch"));
                }
                (loc, None, false)
            }
        };
        Ok(self.bounds_at(location, skip_point, skip_origin))
    }

    /// Mark bounds at `location` for point `index` as if it were moved there.
    pub fn mark_box_moved(&self, index: usize, location: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if index >= self.points.len() || location.len() != self.covariates {
            return Err(Error::invalid("bad point index or location"));
        }
        Ok(self.bounds_at(location, Some(index), false))
    }

    fn bounds_at(&self, location: &[f64], skip_point: Option<usize>, skip_origin: bool) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![self.range.lower; self.levels];
        let mut hi = vec![self.range.upper; self.levels];
        if !skip_origin {
            // the origin lies below every location
            for (l, &m) in lo.iter_mut().zip(&self.origin.marks) {
                *l = l.max(m);
            }
            if location.iter().all(|&v| v == 0.0) {
                for (h, &m) in hi.iter_mut().zip(&self.origin.marks) {
                    *h = h.min(m);
                }
            }
        }
        for (i, pt) in self.points.iter().enumerate() {
            if Some(i) == skip_point {
                continue;
            }
            if weakly_below(&pt.location, location) {
                for (l, &m) in lo.iter_mut().zip(&pt.marks) {
                    *l = l.max(m);
                }
            }
            if weakly_below(location, &pt.location) {
                for (h, &m) in hi.iter_mut().zip(&pt.marks) {
                    *h = h.min(m);
                }
            }
        }
        if self.pin_top {
            lo[0] = self.range.upper;
            hi[0] = self.range.upper;
        }
        (lo, hi)
    }

    /// Interval in which the level-`level` mark of `target` may lie given all
    /// other marks. With `within_point` the neighbouring levels of the same
    /// point are also respected.
    pub fn level_bounds(&self, target: PointRef<'_>, level: usize, within_point: bool) -> Result<Interval> {
        if level == 0 || level > self.levels {
            return Err(Error::invalid(format!("level {level} outside 1..={}", self.levels)));
        }
        let (lo, hi) = self.mark_box(target)?;
        let k = level - 1;
        let (mut lower, mut upper) = (lo[k], hi[k]);
        if within_point {
            let own = match target {
                PointRef::Origin => Some(&self.origin.marks),
                PointRef::Existing(i) => Some(&self.points[i].marks),
                PointRef::Proposed(_) => None,
            };
            if let Some(marks) = own {
                if k + 1 < self.levels {
                    lower = lower.max(marks[k + 1]);
                }
                if k > 0 {
                    upper = upper.min(marks[k - 1]);
                }
            }
        }
        if lower > upper {
            if lower - upper <= CONSTRAINT_SLACK {
                upper = lower;
            } else {
                return Err(Error::EmptyRegion(format!(
                    "level {level} bounds [{lower}, {upper}]"
                )));
            }
        }
        Ok(Interval { lower, upper })
    }

    /// Per-coordinate interval a point may move in without passing any other
    /// point's coordinate. Inactive coordinates are pinned at zero.
    pub fn position_bounds(&self, index: usize) -> Result<Vec<Interval>> {
        let pt = self
            .points
            .get(index)
            .ok_or_else(|| Error::invalid(format!("no point with index {index}")))?;
        let mut out = Vec::with_capacity(self.covariates);
        for j in 0..self.covariates {
            if !pt.subspace.contains(j) {
                out.push(Interval { lower: 0.0, upper: 0.0 });
                continue;
            }
            let cur = pt.location[j];
            let mut lower: f64 = 0.0;
            let mut upper: f64 = 1.0;
            for (r, other) in self.points.iter().enumerate() {
                if r == index {
                    continue;
                }
                let v = other.location[j];
                if v <= cur {
                    lower = lower.max(v);
                }
                if v >= cur {
                    upper = upper.min(v);
                }
            }
            out.push(Interval { lower, upper });
        }
        Ok(out)
    }

    /// Every violated invariant. Empty iff the configuration is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let range = self.range;
        let check_marks = |label: PointLabel, marks: &[f64], out: &mut Vec<Violation>| {
            if marks.len() != self.levels {
                out.push(Violation::Shape {
                    point: label,
                    message: format!("{} marks, expected {}", marks.len(), self.levels),
                });
                return;
            }
            for (k, &m) in marks.iter().enumerate() {
                if !m.is_finite() || !range.contains(m) {
                    out.push(Violation::Range { point: label, level: k + 1, value: m });
                }
            }
            if self.pin_top && marks[0] != range.upper {
                out.push(Violation::PinnedTop { point: label, value: marks[0] });
            }
            for k in 1..marks.len() {
                if marks[k] > marks[k - 1] + CONSTRAINT_SLACK {
                    out.push(Violation::WithinPoint {
                        point: label,
                        level: k + 1,
                        upper: marks[k - 1],
                        lower: marks[k],
                    });
                }
            }
        };
        check_marks(PointLabel::Origin, &self.origin.marks, &mut out);
        for (i, pt) in self.points.iter().enumerate() {
            let label = PointLabel::Point(i);
            if let Err(e) = self.check_shape(pt) {
                if pt.location.len() == self.covariates {
                    for (j, &v) in pt.location.iter().enumerate() {
                        let bad = if pt.subspace.contains(j) {
                            !(0.0..=1.0).contains(&v)
                        } else {
                            v != 0.0
                        };
                        if bad {
                            out.push(Violation::Location { point: label, coordinate: j, value: v });
                        }
                    }
                } else {
                    out.push(Violation::Shape { point: label, message: e.to_string() });
                }
            }
            check_marks(label, &pt.marks, &mut out);
        }
        if !out.is_empty() {
            // pairwise checks need well-formed points
            return out;
        }
        let zeros = vec![0.0; self.covariates];
        let mut generators: Vec<(PointLabel, &[f64], &[f64])> =
            vec![(PointLabel::Origin, &zeros, &self.origin.marks)];
        generators.extend(
            self.points
                .iter()
                .enumerate()
                .map(|(i, pt)| (PointLabel::Point(i), pt.location.as_slice(), pt.marks.as_slice())),
        );
        for (a, (la, loc_a, marks_a)) in generators.iter().enumerate() {
            for (b, (lb, loc_b, marks_b)) in generators.iter().enumerate() {
                if a == b || !weakly_below(loc_a, loc_b) {
                    continue;
                }
                for k in 0..self.levels {
                    if marks_a[k] > marks_b[k] + CONSTRAINT_SLACK {
                        out.push(Violation::CrossPoint {
                            below: *la,
                            above: *lb,
                            level: k + 1,
                            below_value: marks_a[k],
                            above_value: marks_b[k],
                        });
                    }
                }
            }
        }
        for (slot, id) in self.subspaces.iter().enumerate() {
            let value = self.intensities[slot];
            if !(value > 0.0) || !value.is_finite() {
                out.push(Violation::Intensity { subspace: *id, value });
            }
            let actual = self.points.iter().filter(|pt| pt.subspace == *id).count();
            if actual != self.counts[slot] {
                out.push(Violation::Count { subspace: *id, stored: self.counts[slot], actual });
            }
        }
        out
    }

    /// Applies an edit, returning the generators it removed and added plus an
    /// undo token.
    pub fn apply(&mut self, edit: Edit) -> Result<(Change, Undo)> {
        let zeros = vec![0.0; self.covariates];
        match edit {
            Edit::Birth(point) => {
                let added = Generator { location: point.location.clone(), marks: point.marks.clone() };
                self.push_point(point)?;
                Ok((Change { removed: vec![], added: vec![added] }, Undo(UndoKind::Birth)))
            }
            Edit::Death(index) => {
                let point = self.remove_point(index)?;
                let removed = Generator { location: point.location.clone(), marks: point.marks.clone() };
                Ok((Change { removed: vec![removed], added: vec![] }, Undo(UndoKind::Death { index, point })))
            }
            Edit::DeathBirth { victim, point } => {
                self.check_shape(&point)?;
                let old = self.remove_point(victim)?;
                let removed = Generator { location: old.location.clone(), marks: old.marks.clone() };
                let added = Generator { location: point.location.clone(), marks: point.marks.clone() };
                self.push_point(point).expect("shape checked");
                Ok((
                    Change { removed: vec![removed], added: vec![added] },
                    Undo(UndoKind::DeathBirth { index: victim, point: old }),
                ))
            }
            Edit::Move { index, location } => {
                let subspace = self
                    .points
                    .get(index)
                    .ok_or_else(|| Error::invalid(format!("no point with index {index}")))?
                    .subspace;
                self.check_location(subspace, &location)?;
                let pt = &mut self.points[index];
                let old = std::mem::replace(&mut pt.location, location);
                let change = Change {
                    removed: vec![Generator { location: old.clone(), marks: pt.marks.clone() }],
                    added: vec![Generator { location: pt.location.clone(), marks: pt.marks.clone() }],
                };
                Ok((change, Undo(UndoKind::Move { index, location: old })))
            }
            Edit::Marks { index, marks } => {
                let old = self
                    .points
                    .get(index)
                    .ok_or_else(|| Error::invalid(format!("no point with index {index}")))?
                    .marks
                    .clone();
                let location = self.points[index].location.clone();
                self.set_marks(index, marks.clone())?;
                let change = Change {
                    removed: vec![Generator { location: location.clone(), marks: old.clone() }],
                    added: vec![Generator { location, marks }],
                };
                Ok((change, Undo(UndoKind::Marks { index, marks: old })))
            }
            Edit::OriginMarks(marks) => {
                let old = self.origin.marks.clone();
                self.set_origin_marks(marks.clone())?;
                let change = Change {
                    removed: vec![Generator { location: zeros.clone(), marks: old.clone() }],
                    added: vec![Generator { location: zeros, marks }],
                };
                Ok((change, Undo(UndoKind::Origin(old))))
            }
        }
    }

    pub fn undo(&mut self, undo: Undo) {
        match undo.0 {
            UndoKind::Birth => {
                let pt = self.points.pop().expect("birth undo on empty configuration");
                let slot = self.subspace_slot(pt.subspace).expect("stored point");
                self.counts[slot] -= 1;
            }
            UndoKind::Death { index, point } => self.insert_point(index, point),
            UndoKind::DeathBirth { index, point } => {
                let born = self.points.pop().expect("death-birth undo");
                let slot = self.subspace_slot(born.subspace).expect("stored point");
                self.counts[slot] -= 1;
                self.insert_point(index, point);
            }
            UndoKind::Move { index, location } => self.points[index].location = location,
            UndoKind::Marks { index, marks } => self.points[index].marks = marks,
            UndoKind::Origin(marks) => self.origin.marks = marks,
        }
    }
}
