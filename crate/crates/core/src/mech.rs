//! Closed-form mechanics of the idealized bistable truss.
//!
//! One inclined rigid bar of rise `H` over half-span `L` is held by a linear
//! support spring `k` and torsional joint springs `k_θ`. Pushing the shuttle
//! down by `V` shortens nothing (the bar is axially rigid) but displaces the
//! support by `d` and rotates the joints by `Δα`. Units are mm, N and N·mm
//! throughout; the hydro module converts to SI.
//!
//! Sign convention: a positive load `P` pushes the shuttle from the fabricated
//! state (`V = 0`) toward the activated state (`V ≈ 2H`).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MechError {
    #[error("invalid truss geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error("displacement {v} mm outside the shuttle range [0, {max}] mm")]
    Domain { v: f64, max: f64 },
    #[error("truss is not bistable ({roots} equilibrium found)")]
    NotBistable { roots: usize },
}

pub type Result<T> = std::result::Result<T, MechError>;

/// Idealized bistable truss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrussGeometry<T> {
    /// Rise `H` of the bar above the support line (mm).
    pub rise: T,
    /// Projected half span `L` (mm).
    pub half_span: T,
    /// Linear support stiffness `k` (N/mm).
    pub support_stiffness: T,
    /// Torsional joint stiffness `k_θ` (N·mm/rad).
    pub joint_stiffness: T,
}

impl<T: Scalar> TrussGeometry<T> {
    pub fn new(rise: T, half_span: T, support_stiffness: T, joint_stiffness: T) -> Result<Self> {
        let g = Self {
            rise,
            half_span,
            support_stiffness,
            joint_stiffness,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.rise, self.half_span, self.support_stiffness, self.joint_stiffness]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(MechError::InvalidGeometry("parameters must be finite"));
        }
        if self.rise <= T::zero() {
            return Err(MechError::InvalidGeometry("rise H must be positive"));
        }
        if self.half_span <= T::zero() {
            return Err(MechError::InvalidGeometry("half span L must be positive"));
        }
        if self.support_stiffness < T::zero() || self.joint_stiffness < T::zero() {
            return Err(MechError::InvalidGeometry("stiffnesses must be non-negative"));
        }
        if self.support_stiffness == T::zero() && self.joint_stiffness == T::zero() {
            return Err(MechError::InvalidGeometry("k and k_theta cannot both be zero"));
        }
        Ok(())
    }

    /// Full shuttle travel `2H`.
    #[inline]
    pub fn travel(&self) -> T {
        self.rise + self.rise
    }

    fn check_domain(&self, v: T) -> Result<T> {
        let max = self.travel();
        let slop = T::tiny() * self.rise;
        if !v.is_finite() || v < -slop || v > max + slop {
            return Err(MechError::Domain {
                v: v.as_f64(),
                max: max.as_f64(),
            });
        }
        Ok(v.max(T::zero()).min(max))
    }

    /// Deformed projected length `L1 = √(2HV + L² − V²)`.
    pub fn projected_length(&self, v: T) -> Result<T> {
        let v = self.check_domain(v)?;
        let (h, l) = (self.rise, self.half_span);
        let radicand = (h + h) * v + l * l - v * v;
        if radicand < T::zero() {
            return Err(MechError::Domain {
                v: v.as_f64(),
                max: self.travel().as_f64(),
            });
        }
        Ok(radicand.sqrt())
    }

    /// Support displacement `d = L1 − L`.
    pub fn projected_shortening(&self, v: T) -> Result<T> {
        Ok(self.projected_length(v)? - self.half_span)
    }

    /// Joint rotation `Δα = atan((H − V)/L1) − atan(H/L)`.
    pub fn joint_rotation(&self, v: T) -> Result<T> {
        let l1 = self.projected_length(v)?;
        Ok(((self.rise - v) / l1).atan() - (self.rise / self.half_span).atan())
    }

    /// Stored elastic energy `½k d² + ½k_θ Δα²` (N·mm).
    pub fn strain_energy(&self, v: T) -> Result<T> {
        let l1 = self.projected_length(v)?;
        let d = l1 - self.half_span;
        let dalpha = ((self.rise - v) / l1).atan() - (self.rise / self.half_span).atan();
        let half = T::lit(0.5);
        Ok(half * self.support_stiffness * d * d + half * self.joint_stiffness * dalpha * dalpha)
    }

    /// Shuttle load `P(V) = −(2/L1)[k(L − L1)(H − V) + k_θ Δα]` (N).
    pub fn load(&self, v: T) -> Result<T> {
        let l1 = self.projected_length(v)?;
        let (h, l) = (self.rise, self.half_span);
        let dalpha = ((h - v) / l1).atan() - (h / l).atan();
        let bracket = self.support_stiffness * (l - l1) * (h - v) + self.joint_stiffness * dalpha;
        Ok(-T::lit(2.0) / l1 * bracket)
    }

    /// All equilibria on `[0, 2H]` with the default scan resolution.
    pub fn equilibria(&self) -> Vec<T> {
        self.equilibria_with(&RootScan::default())
    }

    /// Roots of `P(V)` on `[0, 2H]` by uniform sign-change scan plus bisection.
    pub fn equilibria_with(&self, scan: &RootScan<T>) -> Vec<T> {
        let n = scan.samples.max(3);
        let grid = self.grid(n);
        let loads: Vec<T> = grid.iter().map(|&v| self.load_unchecked(v)).collect();
        let scale = loads.iter().fold(T::zero(), |m, p| m.max(p.abs()));
        let zero_tol = scale * T::lit(1e-10).max(T::epsilon() * T::lit(1e3));

        let mut roots = Vec::new();
        let mut prev_zero = false;
        for i in 0..n {
            let is_zero = loads[i].abs() <= zero_tol;
            if is_zero {
                if !prev_zero {
                    roots.push(grid[i]);
                }
            } else if i > 0 && !prev_zero && (loads[i - 1] < T::zero()) != (loads[i] < T::zero()) {
                roots.push(bisect(|v| self.load_unchecked(v), grid[i - 1], grid[i], scan));
            }
            prev_zero = is_zero;
        }
        roots
    }

    /// Load/energy profile with extrema and barriers. Fails on a monostable truss.
    pub fn barriers(&self) -> Result<BistableProfile<T>> {
        self.barriers_with(&RootScan::default())
    }

    pub fn barriers_with(&self, scan: &RootScan<T>) -> Result<BistableProfile<T>> {
        self.validate()?;
        let roots = self.equilibria_with(scan);
        if roots.len() != 3 {
            return Err(MechError::NotBistable { roots: roots.len() });
        }
        let (r1, r2, r3) = (roots[0], roots[1], roots[2]);
        let grid = self.grid(scan.samples.max(3));
        let load_curve: Vec<T> = grid.iter().map(|&v| self.load_unchecked(v)).collect();

        let forward_peak_force = self.refine_extremum(&grid, &load_curve, r1, r2, true);
        let reverse_peak_force = self.refine_extremum(&grid, &load_curve, r2, r3, false);

        let e1 = self.strain_energy(r1)?;
        let e2 = self.strain_energy(r2)?;
        let e3 = self.strain_energy(r3)?;

        Ok(BistableProfile {
            geometry: *self,
            displacement_grid: grid,
            load_curve,
            equilibria: roots,
            forward_peak_force,
            reverse_peak_force,
            forward_energy_barrier: e2 - e1,
            reverse_energy_barrier: e2 - e3,
        })
    }

    /// `load` for displacements already known to be in range.
    #[inline]
    pub(crate) fn load_unchecked(&self, v: T) -> T {
        self.load(v).unwrap_or_else(|_| T::nan())
    }

    fn grid(&self, n: usize) -> Vec<T> {
        let last = T::lit((n - 1) as f64);
        let travel = self.travel();
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    travel
                } else {
                    travel * T::lit(i as f64) / last
                }
            })
            .collect()
    }

    /// Signed extremum of `P` on `(a, b)`: maximum if `maximize`, else minimum.
    /// Grid argmax refined by golden-section search on the neighbouring cells.
    fn refine_extremum(&self, grid: &[T], loads: &[T], a: T, b: T, maximize: bool) -> T {
        let sign = if maximize { T::one() } else { -T::one() };
        let f = |v: T| sign * self.load_unchecked(v);
        let mut best = None::<usize>;
        for (i, (&v, &p)) in grid.iter().zip(loads).enumerate() {
            if v > a && v < b && best.is_none_or(|j| sign * p > sign * loads[j]) {
                best = Some(i);
            }
        }
        let (lo, hi) = match best {
            Some(i) => (
                grid[i.saturating_sub(1)].max(a),
                grid[(i + 1).min(grid.len() - 1)].min(b),
            ),
            None => (a, b),
        };
        let v = golden_max(f, lo, hi, T::tiny() * self.rise);
        sign * f(v)
    }
}

/// Resolution of the equilibrium scan.
#[derive(Debug, Clone, Copy)]
pub struct RootScan<T> {
    pub samples: usize,
    /// Residual target `|P(root)|` (N).
    pub force_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for RootScan<T> {
    fn default() -> Self {
        Self {
            samples: 2048,
            force_tol: T::lit(1e-9),
            max_iter: 200,
        }
    }
}

/// Bisection on a sign-changing bracket. Runs until the bracket collapses to
/// machine precision so closely spaced roots are located, not merely residual-small.
pub(crate) fn bisect<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, scan: &RootScan<T>) -> T {
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return a;
    }
    if fb == T::zero() {
        return b;
    }
    let half = T::lit(0.5);
    let width_tol = T::epsilon() * T::lit(4.0) * a.abs().max(b.abs()).max(T::one());
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    for _ in 0..scan.max_iter {
        let m = a + half * (b - a);
        let fm = f(m);
        if fm.abs() < best.1.abs() {
            best = (m, fm);
        }
        if fm == T::zero() || (b - a).abs() <= width_tol {
            break;
        }
        if (fa < T::zero()) == (fm < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    best.0
}

/// Golden-section maximizer of a unimodal function on `[a, b]`.
pub(crate) fn golden_max<T: Scalar>(f: impl Fn(T) -> T, mut a: T, mut b: T, tol: T) -> T {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        c
    } else {
        d
    }
}

/// Direction of a snap through the unstable equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapDirection {
    /// Fabricated state toward activated state.
    Forward,
    /// Activated state back to fabricated state.
    Reverse,
}

/// Sampled load curve of a bistable truss with its equilibria and barriers.
#[derive(Debug, Clone, PartialEq)]
pub struct BistableProfile<T> {
    pub geometry: TrussGeometry<T>,
    pub displacement_grid: Vec<T>,
    pub load_curve: Vec<T>,
    /// Stable, unstable, stable (ascending V).
    pub equilibria: Vec<T>,
    /// `F_Bi,max`: largest load on the forward sweep (positive).
    pub forward_peak_force: T,
    /// `F_Bi,min`: most negative load past the unstable point (negative).
    pub reverse_peak_force: T,
    pub forward_energy_barrier: T,
    pub reverse_energy_barrier: T,
}

impl<T: Scalar> BistableProfile<T> {
    pub fn first_stable(&self) -> T {
        self.equilibria[0]
    }

    pub fn unstable(&self) -> T {
        self.equilibria[1]
    }

    pub fn second_stable(&self) -> T {
        self.equilibria[2]
    }

    pub fn load(&self, v: T) -> T {
        self.geometry.load_unchecked(v)
    }

    pub fn energy(&self, v: T) -> T {
        self.geometry.strain_energy(v).unwrap_or_else(|_| T::nan())
    }

    /// Stable state a snap in `direction` lands in.
    pub fn destination(&self, direction: SnapDirection) -> T {
        match direction {
            SnapDirection::Forward => self.second_stable(),
            SnapDirection::Reverse => self.first_stable(),
        }
    }

    /// Distance travelled by the shuttle from the unstable point to the destination.
    pub fn stroke_length(&self, direction: SnapDirection) -> T {
        (self.destination(direction) - self.unstable()).abs()
    }

    /// Strain energy released between the unstable point and the destination.
    pub fn released_energy(&self, direction: SnapDirection) -> T {
        self.energy(self.unstable()) - self.energy(self.destination(direction))
    }
}
