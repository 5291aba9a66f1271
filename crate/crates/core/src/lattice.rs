//! Geometry of finite boxes in ℤ^d: sites, bonds, plaquettes, boundaries,
//! translations of nested dyadic cubes and the plaquette-path metric on bonds.
//!
//! Directions are 0-based (`0..d`). Sites are enumerated lexicographically in
//! `(x_1, …, x_d)` with `x_1` the slowest index; bonds are enumerated by site
//! and then direction. Both orders are part of the on-disk gauge-file layout
//! and of the Dirac matrix index layout.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

/// Integer lattice point.
pub type Site = Vec<i64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("all side lengths must be at least 2, got {0:?}")]
    Side(Vec<usize>),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cube sequence parameters must be positive (l0={l0}, n={n})")]
    CubeParams { l0: i64, n: i64 },
    #[error("invalid direction {mu} for dimension {d}")]
    Direction { mu: usize, d: usize },
    #[error("site sets overlap at {0:?}")]
    Overlap(Site),
}

/// An axis-aligned box `origin + [0, sides)` in ℤ^d.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeGeometry {
    sides: Vec<usize>,
    origin: Vec<i64>,
}

impl LatticeGeometry {
    pub fn new(sides: Vec<usize>, origin: Vec<i64>) -> Result<Self, LatticeError> {
        let d = sides.len();
        if d < 2 {
            return Err(LatticeError::Dimension(d));
        }
        if origin.len() != d {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: origin.len(),
            });
        }
        if sides.iter().any(|&s| s < 2) {
            return Err(LatticeError::Side(sides));
        }
        Ok(Self { sides, origin })
    }

    /// Cube of side `side` with lowest corner `origin`.
    pub fn cube_at(side: usize, origin: Vec<i64>) -> Result<Self, LatticeError> {
        Self::new(vec![side; origin.len()], origin)
    }

    /// Periodic sampling torus `{0, …, side−1}^d`.
    pub fn torus(d: usize, side: usize) -> Result<Self, LatticeError> {
        Self::cube_at(side, vec![0; d])
    }

    /// `Λ_n = {−l0·2^{n−1}+1, …, l0·2^{n−1}}^d`, side `l0·2^n`.
    pub fn cube(l0: i64, n: i64, d: usize) -> Result<Self, LatticeError> {
        if l0 <= 0 || n <= 0 {
            return Err(LatticeError::CubeParams { l0, n });
        }
        let half = l0 << (n - 1);
        Self::cube_at(2 * half as usize, vec![-half + 1; d])
    }

    /// Cube of (even or odd) side `side` centred like the dyadic sequence:
    /// `{−⌊side/2⌋+1, …, ⌈side/2⌉}^d`.
    pub fn centered_cube(side: usize, d: usize) -> Result<Self, LatticeError> {
        let lo = -((side / 2) as i64) + 1;
        Self::cube_at(side, vec![lo; d])
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.sides.len()
    }

    #[inline]
    pub fn sides(&self) -> &[usize] {
        &self.sides
    }

    #[inline]
    pub fn origin(&self) -> &[i64] {
        &self.origin
    }

    /// Highest corner (inclusive).
    pub fn upper(&self) -> Site {
        self.origin
            .iter()
            .zip(&self.sides)
            .map(|(&o, &s)| o + s as i64 - 1)
            .collect()
    }

    /// Common side length when the box is a cube.
    pub fn side(&self) -> Option<usize> {
        let s = self.sides[0];
        self.sides.iter().all(|&t| t == s).then_some(s)
    }

    pub fn is_cube(&self) -> bool {
        self.side().is_some()
    }

    pub fn volume(&self) -> usize {
        self.sides.iter().product()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.d()
            && x.iter()
                .zip(&self.origin)
                .zip(&self.sides)
                .all(|((&xi, &o), &s)| xi >= o && xi < o + s as i64)
    }

    /// Lexicographic rank of `x`, or `None` when outside.
    pub fn rank(&self, x: &[i64]) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut r = 0usize;
        for ((&xi, &o), &s) in x.iter().zip(&self.origin).zip(&self.sides) {
            r = r * s + (xi - o) as usize;
        }
        Some(r)
    }

    pub fn site(&self, mut rank: usize) -> Site {
        let d = self.d();
        let mut x = vec![0i64; d];
        for i in (0..d).rev() {
            x[i] = self.origin[i] + (rank % self.sides[i]) as i64;
            rank /= self.sides[i];
        }
        x
    }

    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.volume()).map(move |r| self.site(r))
    }

    /// Reduces `x` periodically into the box.
    pub fn wrap(&self, x: &[i64]) -> Site {
        x.iter()
            .zip(&self.origin)
            .zip(&self.sides)
            .map(|((&xi, &o), &s)| o + (xi - o).rem_euclid(s as i64))
            .collect()
    }

    pub fn wrapped_rank(&self, x: &[i64]) -> usize {
        let mut r = 0usize;
        for ((&xi, &o), &s) in x.iter().zip(&self.origin).zip(&self.sides) {
            r = r * s + (xi - o).rem_euclid(s as i64) as usize;
        }
        r
    }

    /// Sites `y ∈ Λ` with a nearest neighbour outside `Λ`, in enumeration order.
    pub fn boundary(&self) -> Vec<Site> {
        let upper = self.upper();
        self.sites()
            .filter(|x| {
                x.iter()
                    .zip(&self.origin)
                    .zip(&upper)
                    .any(|((&xi, &lo), &hi)| xi == lo || xi == hi)
            })
            .collect()
    }

    /// `|∂Λ| = |Λ| − Π_i max(L_i − 2, 0)`.
    pub fn boundary_len(&self) -> usize {
        self.volume() - self.sides.iter().map(|&s| s.saturating_sub(2)).product::<usize>()
    }

    pub fn translated(&self, shift: &[i64]) -> Self {
        assert_eq!(shift.len(), self.d());
        Self {
            sides: self.sides.clone(),
            origin: self.origin.iter().zip(shift).map(|(a, b)| a + b).collect(),
        }
    }

    /// All `d·|Λ|` bonds `(x, μ)` with `x ∈ Λ`, as used under periodic closure.
    pub fn periodic_bonds(&self) -> Vec<Bond> {
        let d = self.d();
        self.sites()
            .flat_map(|x| (0..d).map(move |mu| Bond { x: x.clone(), mu }))
            .collect()
    }

    /// Bonds with both endpoints inside `Λ`.
    pub fn open_bonds(&self) -> Vec<Bond> {
        self.periodic_bonds()
            .into_iter()
            .filter(|b| self.contains(&b.head()))
            .collect()
    }
}

/// Oriented bond from `x` to `x + ê_mu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bond {
    pub x: Site,
    pub mu: usize,
}

impl Bond {
    pub fn new(x: Site, mu: usize) -> Self {
        Self { x, mu }
    }

    /// End point `x + ê_mu`.
    pub fn head(&self) -> Site {
        shifted(&self.x, self.mu, 1)
    }

    pub fn translated(&self, shift: &[i64]) -> Self {
        Self {
            x: self.x.iter().zip(shift).map(|(a, b)| a + b).collect(),
            mu: self.mu,
        }
    }
}

/// `x + step·ê_mu`.
#[inline]
pub fn shifted(x: &[i64], mu: usize, step: i64) -> Site {
    let mut y = x.to_vec();
    y[mu] += step;
    y
}

/// Elementary square `p(x; mu, nu)` spanned by directions `mu ≠ nu`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Plaquette {
    pub x: Site,
    pub mu: usize,
    pub nu: usize,
}

impl Plaquette {
    pub fn new(x: Site, mu: usize, nu: usize) -> Result<Self, LatticeError> {
        let d = x.len();
        if mu == nu || mu >= d || nu >= d {
            return Err(LatticeError::Direction { mu: mu.max(nu), d });
        }
        Ok(Self { x, mu, nu })
    }

    pub fn is_positive(&self) -> bool {
        self.mu < self.nu
    }

    /// The same set of bonds with positive orientation.
    pub fn positive(&self) -> Self {
        Self {
            x: self.x.clone(),
            mu: self.mu.min(self.nu),
            nu: self.mu.max(self.nu),
        }
    }

    /// `{(x,μ), (x+ê_μ,ν), (x+ê_ν,μ), (x,ν)}`.
    pub fn bonds(&self) -> [Bond; 4] {
        [
            Bond::new(self.x.clone(), self.mu),
            Bond::new(shifted(&self.x, self.mu, 1), self.nu),
            Bond::new(shifted(&self.x, self.nu, 1), self.mu),
            Bond::new(self.x.clone(), self.nu),
        ]
    }

    pub fn contains(&self, b: &Bond) -> bool {
        self.bonds().iter().any(|c| c == b)
    }
}

/// The `2(d−1)` positively oriented plaquettes containing `b`.
pub fn plaquettes_containing(b: &Bond, d: usize) -> Result<Vec<Plaquette>, LatticeError> {
    if b.x.len() != d {
        return Err(LatticeError::DimensionMismatch {
            expected: d,
            got: b.x.len(),
        });
    }
    if b.mu >= d {
        return Err(LatticeError::Direction { mu: b.mu, d });
    }
    let mut out = Vec::with_capacity(2 * (d - 1));
    for nu in (0..d).filter(|&nu| nu != b.mu) {
        let (lo, hi) = (b.mu.min(nu), b.mu.max(nu));
        out.push(Plaquette {
            x: b.x.clone(),
            mu: lo,
            nu: hi,
        });
        out.push(Plaquette {
            x: shifted(&b.x, nu, -1),
            mu: lo,
            nu: hi,
        });
    }
    Ok(out)
}

/// Minimal number of plaquettes in a chain of pairwise-intersecting
/// plaquettes joining `a` to `b` on the infinite lattice.
///
/// Breadth-first search over the bond graph (two bonds adjacent when they lie
/// in a common plaquette), confined to a box of radius `‖x−y‖₁ + d` around the
/// pair; the upper bound `d(a,b) ≤ ‖x−y‖₁ + d` makes the confinement exact.
pub fn bond_metric(a: &Bond, b: &Bond) -> Result<usize, LatticeError> {
    let d = a.x.len();
    if b.x.len() != d {
        return Err(LatticeError::DimensionMismatch {
            expected: d,
            got: b.x.len(),
        });
    }
    for bond in [a, b] {
        if bond.mu >= d {
            return Err(LatticeError::Direction { mu: bond.mu, d });
        }
    }
    if a == b {
        return Ok(0);
    }
    let l1: i64 = a.x.iter().zip(&b.x).map(|(p, q)| (p - q).abs()).sum();
    let radius = l1 + d as i64;
    let lo: Vec<i64> = a.x.iter().zip(&b.x).map(|(p, q)| p.min(q) - radius).collect();
    let hi: Vec<i64> = a.x.iter().zip(&b.x).map(|(p, q)| p.max(q) + radius).collect();
    let inside = |x: &[i64]| x.iter().zip(&lo).zip(&hi).all(|((v, l), h)| v >= l && v <= h);

    let mut dist: HashMap<Bond, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(a.clone(), 0);
    queue.push_back(a.clone());
    while let Some(cur) = queue.pop_front() {
        let dc = dist[&cur];
        for p in plaquettes_containing(&cur, d)? {
            for nb in p.bonds() {
                if !inside(&nb.x) || dist.contains_key(&nb) {
                    continue;
                }
                if &nb == b {
                    return Ok(dc + 1);
                }
                dist.insert(nb.clone(), dc + 1);
                queue.push_back(nb);
            }
        }
    }
    unreachable!("bond graph restricted to the search box is connected")
}

/// Additive shifts `s_1, …, s_{2^d}` with `Λ_{n+1} = ⋃_i (Λ_n + s_i)`, the
/// union being disjoint. In the convention `T^z x = x − z` these are `s = −z`.
pub fn split_translations(n: i64, l0: i64, d: usize) -> Result<Vec<Vec<i64>>, LatticeError> {
    if l0 <= 0 || n <= 0 {
        return Err(LatticeError::CubeParams { l0, n });
    }
    let half = l0 << (n - 1);
    Ok((0..1usize << d)
        .map(|mask| {
            (0..d)
                .map(|i| if mask >> (d - 1 - i) & 1 == 1 { half } else { -half })
                .collect()
        })
        .collect())
}

/// Shifts composing `Λ_m` out of `2^{d(m−n)}` translates of `Λ_n` (`m > n`).
pub fn composed_translations(n: i64, m: i64, l0: i64, d: usize) -> Result<Vec<Vec<i64>>, LatticeError> {
    let mut acc: Vec<Vec<i64>> = vec![vec![0; d]];
    for level in n..m {
        let step = split_translations(level, l0, d)?;
        acc = acc
            .iter()
            .flat_map(|a| step.iter().map(move |s| a.iter().zip(s).map(|(p, q)| p + q).collect()))
            .collect();
    }
    Ok(acc)
}

/// Nested dyadic cubes `Λ_n`, `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeSequence {
    pub l0: i64,
    pub d: usize,
}

impl CubeSequence {
    pub fn new(l0: i64, d: usize) -> Result<Self, LatticeError> {
        if l0 <= 0 {
            return Err(LatticeError::CubeParams { l0, n: 1 });
        }
        if d < 2 {
            return Err(LatticeError::Dimension(d));
        }
        Ok(Self { l0, d })
    }

    pub fn level(&self, n: i64) -> Result<LatticeGeometry, LatticeError> {
        LatticeGeometry::cube(self.l0, n, self.d)
    }

    pub fn side(&self, n: i64) -> usize {
        (self.l0 << n) as usize
    }
}

/// Finite set of sites in lexicographic order, with rank lookup.
///
/// Boxes are the common case; unions of boxes are needed for the Dirichlet
/// splitting estimates where the union need not be a box.
#[derive(Debug, Clone)]
pub struct SiteSet {
    d: usize,
    sites: Vec<Site>,
    index: HashMap<Site, usize>,
    bbox: Option<LatticeGeometry>,
}

impl SiteSet {
    pub fn from_box(geom: &LatticeGeometry) -> Self {
        let sites: Vec<Site> = geom.sites().collect();
        let index = sites.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self {
            d: geom.d(),
            sites,
            index,
            bbox: Some(geom.clone()),
        }
    }

    pub fn from_sites(d: usize, sites: impl IntoIterator<Item = Site>) -> Result<Self, LatticeError> {
        let mut sites: Vec<Site> = sites.into_iter().collect();
        if let Some(bad) = sites.iter().find(|s| s.len() != d) {
            return Err(LatticeError::DimensionMismatch {
                expected: d,
                got: bad.len(),
            });
        }
        sites.sort();
        if let Some(w) = sites.windows(2).find(|w| w[0] == w[1]) {
            return Err(LatticeError::Overlap(w[0].clone()));
        }
        let index = sites.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self {
            d,
            sites,
            index,
            bbox: None,
        })
    }

    /// Union of pairwise disjoint boxes. Fails on overlap.
    pub fn disjoint_union(parts: &[LatticeGeometry]) -> Result<Self, LatticeError> {
        let d = parts.first().map(|g| g.d()).ok_or(LatticeError::Dimension(0))?;
        let set = Self::from_sites(d, parts.iter().flat_map(|g| g.sites()))?;
        // A union of boxes that fills its bounding box is itself a box.
        let lo: Vec<i64> = (0..d).map(|i| set.sites.iter().map(|s| s[i]).min().unwrap()).collect();
        let hi: Vec<i64> = (0..d).map(|i| set.sites.iter().map(|s| s[i]).max().unwrap()).collect();
        let sides: Vec<usize> = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        if sides.iter().product::<usize>() == set.len() && sides.iter().all(|&s| s >= 2) {
            return Ok(Self::from_box(&LatticeGeometry::new(sides, lo)?));
        }
        Ok(set)
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    #[inline]
    pub fn rank(&self, x: &[i64]) -> Option<usize> {
        self.index.get(x).copied()
    }

    #[inline]
    pub fn site(&self, rank: usize) -> &Site {
        &self.sites[rank]
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.index.contains_key(x)
    }

    /// The underlying box, when this set is one.
    pub fn as_box(&self) -> Option<&LatticeGeometry> {
        self.bbox.as_ref()
    }

    pub fn boundary_len(&self) -> usize {
        self.sites
            .iter()
            .filter(|x| (0..self.d).any(|mu| !self.contains(&shifted(x, mu, 1)) || !self.contains(&shifted(x, mu, -1))))
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn cube_examples() {
        let c = LatticeGeometry::cube(2, 1, 2).unwrap();
        assert_eq!(c.origin(), &[-1, -1]);
        assert_eq!(c.upper(), vec![2, 2]);
        assert_eq!(c.side(), Some(4));
        assert_eq!(c.volume(), 16);

        let c = LatticeGeometry::cube(1, 1, 2).unwrap();
        assert_eq!(c.origin(), &[0, 0]);
        assert_eq!(c.upper(), vec![1, 1]);

        let c = LatticeGeometry::cube(3, 4, 4).unwrap();
        assert_eq!(c.side(), Some(48));
        assert_eq!(c.volume(), 48usize.pow(4));
    }

    #[test]
    fn cube_rejects_nonpositive() {
        assert!(LatticeGeometry::cube(0, 1, 2).is_err());
        assert!(LatticeGeometry::cube(1, 0, 2).is_err());
        assert!(LatticeGeometry::cube(-1, 2, 2).is_err());
        assert!(LatticeGeometry::cube(1, 1, 1).is_err());
    }

    #[test]
    fn boundary_examples() {
        let g = LatticeGeometry::torus(2, 4).unwrap();
        assert_eq!(g.boundary().len(), 12);
        assert_eq!(g.boundary_len(), 12);
        for d in 2..5 {
            let g = LatticeGeometry::torus(d, 2).unwrap();
            assert_eq!(g.boundary().len(), g.volume());
        }
        let g = LatticeGeometry::torus(4, 4).unwrap();
        assert_eq!(g.boundary().len(), 240);
        assert_eq!(SiteSet::from_box(&g).boundary_len(), 240);
    }

    #[test]
    fn rank_is_lexicographic() {
        let g = LatticeGeometry::new(vec![3, 2], vec![-1, 5]).unwrap();
        let sites: Vec<Site> = g.sites().collect();
        let mut sorted = sites.clone();
        sorted.sort();
        assert_eq!(sites, sorted);
        for (r, s) in sites.iter().enumerate() {
            assert_eq!(g.rank(s), Some(r));
            assert_eq!(g.wrapped_rank(s), r);
        }
        assert_eq!(g.wrap(&[2, 5]), vec![-1, 5]);
        assert_eq!(g.wrap(&[-2, 4]), vec![1, 6]);
    }

    #[test]
    fn bond_counts() {
        let g = LatticeGeometry::torus(3, 4).unwrap();
        assert_eq!(g.periodic_bonds().len(), 3 * 64);
        // open bonds: d · L^{d-1} · (L-1)
        assert_eq!(g.open_bonds().len(), 3 * 16 * 3);
    }

    #[test]
    fn split_tiles_next_level() {
        for d in 2..=3 {
            for n in 1..=2 {
                let small = LatticeGeometry::cube(2, n, d).unwrap();
                let big = LatticeGeometry::cube(2, n + 1, d).unwrap();
                let shifts = split_translations(n, 2, d).unwrap();
                assert_eq!(shifts.len(), 1 << d);
                let mut covered = HashSet::new();
                for s in &shifts {
                    for x in small.translated(s).sites() {
                        assert!(covered.insert(x), "translates overlap");
                    }
                }
                let expect: HashSet<Site> = big.sites().collect();
                assert_eq!(covered, expect);
            }
        }
    }

    #[test]
    fn composed_translation_count() {
        let t = composed_translations(1, 4, 2, 2).unwrap();
        assert_eq!(t.len(), 64);
        let distinct: HashSet<_> = t.iter().collect();
        assert_eq!(distinct.len(), 64);
        let small = LatticeGeometry::cube(2, 1, 2).unwrap();
        let big = LatticeGeometry::cube(2, 4, 2).unwrap();
        let mut covered = HashSet::new();
        for s in &t {
            for x in small.translated(s).sites() {
                assert!(big.contains(&x));
                assert!(covered.insert(x));
            }
        }
        assert_eq!(covered.len(), big.volume());
    }

    #[test]
    fn plaquettes_per_bond() {
        for d in 2..=4 {
            let b = Bond::new(vec![0; d], 0);
            let ps = plaquettes_containing(&b, d).unwrap();
            assert_eq!(ps.len(), 2 * (d - 1));
            for p in &ps {
                assert!(p.is_positive());
                assert!(p.contains(&b));
            }
        }
    }

    #[test]
    fn metric_examples() {
        let a = Bond::new(vec![0, 0], 0);
        assert_eq!(bond_metric(&a, &a).unwrap(), 0);
        let b = Bond::new(vec![0, 0], 1);
        assert_eq!(bond_metric(&a, &b).unwrap(), 1);
        let c = Bond::new(vec![3, 0], 0);
        let m = bond_metric(&a, &c).unwrap();
        assert!((3..=5).contains(&m), "metric {m}");
        assert!(bond_metric(&a, &Bond::new(vec![0, 0, 0], 0)).is_err());
    }

    #[test]
    fn disjoint_union_detects_box_and_overlap() {
        let parts: Vec<_> = split_translations(1, 2, 2)
            .unwrap()
            .iter()
            .map(|s| LatticeGeometry::cube(2, 1, 2).unwrap().translated(s))
            .collect();
        let u = SiteSet::disjoint_union(&parts).unwrap();
        assert_eq!(u.as_box(), Some(&LatticeGeometry::cube(2, 2, 2).unwrap()));
        let dup = vec![parts[0].clone(), parts[0].clone()];
        assert!(matches!(SiteSet::disjoint_union(&dup), Err(LatticeError::Overlap(_))));
        let apart = vec![
            LatticeGeometry::cube_at(2, vec![0, 0]).unwrap(),
            LatticeGeometry::cube_at(2, vec![4, 0]).unwrap(),
        ];
        let u = SiteSet::disjoint_union(&apart).unwrap();
        assert!(u.as_box().is_none());
        assert_eq!(u.len(), 8);
        assert_eq!(u.boundary_len(), 8);
    }
}
