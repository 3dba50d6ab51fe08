//! Matrix Lie algebras, their groups, invariant forms and derivatives along
//! right-trivialized directions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Matrix, Result, Vector};

/// Tolerance used when validating catalog data at construction.
const CONSTRUCTION_TOL: f64 = 1e-12;

/// How group membership is measured for a catalog family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Real orthogonal matrices (also used for the real encoding of unitary ones).
    Orthogonal,
    /// Upper-triangular matrices with unit diagonal.
    Unipotent,
}

/// A finite-dimensional Lie algebra realized by real matrices, together with
/// an invariant symmetric bilinear form.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    name: String,
    family: Family,
    size: usize,
    basis: Vec<Matrix>,
    structure: Vec<f64>,
    form: Matrix,
    gram_inv: Matrix,
    nondegenerate: bool,
}

fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a * b - b * a
}

fn complex_to_real(re: &[[f64; 2]; 2], im: &[[f64; 2]; 2]) -> Matrix {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(2 * i, 2 * j)] = re[i][j];
            m[(2 * i, 2 * j + 1)] = -im[i][j];
            m[(2 * i + 1, 2 * j)] = im[i][j];
            m[(2 * i + 1, 2 * j + 1)] = re[i][j];
        }
    }
    m
}

impl LieAlgebra {
    /// Builds an algebra from basis matrices and a symmetric form.
    ///
    /// Structure constants are read off the matrix commutators; the form is
    /// checked for symmetry and ad-invariance on every basis triple.
    pub fn new(name: &str, family: Family, basis: Vec<Matrix>, form: Matrix) -> Result<Self> {
        let dim = basis.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty basis".into()));
        }
        let size = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != size || b.ncols() != size) {
            return Err(Error::DimensionMismatch { expected: size, found: 0 });
        }
        if form.nrows() != dim || form.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: form.nrows() });
        }
        let gram = DMatrix::from_fn(dim, dim, |i, j| basis[i].dot(&basis[j]));
        let gram_inv = gram.clone().try_inverse().ok_or(Error::SingularGram)?;
        let mut alg = LieAlgebra {
            name: name.to_string(),
            family,
            size,
            basis,
            structure: vec![0.0; dim * dim * dim],
            form,
            gram_inv,
            nondegenerate: false,
        };
        for i in 0..dim {
            for j in 0..dim {
                let c = commutator(&alg.basis[i], &alg.basis[j]);
                let coeffs = alg.from_matrix(&c);
                let back = alg.to_matrix(&coeffs);
                if (back - c).norm() > CONSTRUCTION_TOL {
                    return Err(Error::NotClosed);
                }
                for k in 0..dim {
                    alg.structure[(i * dim + j) * dim + k] = coeffs[k];
                }
            }
        }
        if (&alg.form - alg.form.transpose()).norm() > CONSTRUCTION_TOL {
            return Err(Error::FormNotInvariant);
        }
        if alg.invariance_residual() > CONSTRUCTION_TOL {
            return Err(Error::FormNotInvariant);
        }
        let svd = alg.form.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        alg.nondegenerate = smax > 0.0 && smin > 1e-12 * smax;
        Ok(alg)
    }

    /// Looks up a catalog algebra by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "su2" => Ok(Self::su2()),
            "so3" => Ok(Self::so3()),
            "heisenberg3" => Ok(Self::heisenberg3()),
            "torus2" => Ok(Self::torus2()),
            other => Err(Error::UnknownGroup(other.to_string())),
        }
    }

    /// Names accepted by [`LieAlgebra::by_name`].
    pub fn catalog() -> &'static [&'static str] {
        &["su2", "so3", "heisenberg3", "torus2"]
    }

    /// so(3) with generators of rotations and `B = δ`.
    pub fn so3() -> Self {
        let mut basis = Vec::new();
        for i in 0..3 {
            let mut m = DMatrix::zeros(3, 3);
            for j in 0..3 {
                for k in 0..3 {
                    m[(j, k)] = -levi_civita(i, j, k);
                }
            }
            basis.push(m);
        }
        Self::new("so3", Family::Orthogonal, basis, DMatrix::identity(3, 3)).expect("so3")
    }

    /// su(2) realized as `-iσ_k/2`, encoded as real 4×4 matrices.
    pub fn su2() -> Self {
        let z = [[0.0; 2]; 2];
        let basis = vec![
            complex_to_real(&z, &[[0.0, -0.5], [-0.5, 0.0]]),
            complex_to_real(&[[0.0, -0.5], [0.5, 0.0]], &z),
            complex_to_real(&z, &[[-0.5, 0.0], [0.0, 0.5]]),
        ];
        Self::new("su2", Family::Orthogonal, basis, DMatrix::identity(3, 3)).expect("su2")
    }

    /// Strictly upper-triangular 3×3 matrices. The only invariant symmetric
    /// forms vanish on the center; the one used here is `diag(1, 1, 0)`.
    pub fn heisenberg3() -> Self {
        let unit = |r: usize, c: usize| {
            let mut m = DMatrix::zeros(3, 3);
            m[(r, c)] = 1.0;
            m
        };
        let basis = vec![unit(0, 1), unit(1, 2), unit(0, 2)];
        let form = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]));
        Self::new("heisenberg3", Family::Unipotent, basis, form).expect("heisenberg3")
    }

    /// Two commuting planar rotations, block-diagonal in 4×4.
    pub fn torus2() -> Self {
        let mut a = DMatrix::zeros(4, 4);
        a[(0, 1)] = -1.0;
        a[(1, 0)] = 1.0;
        let mut b = DMatrix::zeros(4, 4);
        b[(2, 3)] = -1.0;
        b[(3, 2)] = 1.0;
        Self::new("torus2", Family::Orthogonal, vec![a, b], DMatrix::identity(2, 2)).expect("torus2")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size of the realizing matrices.
    pub fn matrix_size(&self) -> usize {
        self.size
    }

    pub fn basis(&self) -> &[Matrix] {
        &self.basis
    }

    pub fn form(&self) -> &Matrix {
        &self.form
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.nondegenerate
    }

    /// `c[i][j][k]` with `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    pub fn zero(&self) -> Vector {
        DVector::zeros(self.dim())
    }

    /// The `i`-th basis vector as coefficients.
    pub fn unit(&self, i: usize) -> Vector {
        let mut v = self.zero();
        v[i] = 1.0;
        v
    }

    pub fn check(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(())
    }

    /// Lie bracket in coefficients.
    pub fn bracket(&self, x: &Vector, y: &Vector) -> Vector {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += self.structure[(i * d + j) * d + k] * xy;
                }
            }
        }
        out
    }

    /// Checked variant of [`LieAlgebra::bracket`].
    pub fn try_bracket(&self, x: &Vector, y: &Vector) -> Result<Vector> {
        self.check(x)?;
        self.check(y)?;
        Ok(self.bracket(x, y))
    }

    /// Matrix of `ad_x` acting on coefficients.
    pub fn ad_matrix(&self, x: &Vector) -> Matrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.bracket(x, &self.unit(j));
            m.set_column(j, &col);
        }
        m
    }

    /// The invariant form `x · y`.
    pub fn dot(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.form * y)[(0, 0)]
    }

    pub fn to_matrix(&self, x: &Vector) -> Matrix {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (c, b) in x.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// Least-squares coefficients of a matrix against the basis.
    pub fn from_matrix(&self, m: &Matrix) -> Vector {
        let rhs = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| b.dot(m)));
        &self.gram_inv * rhs
    }

    pub fn identity(&self) -> Matrix {
        DMatrix::identity(self.size, self.size)
    }

    /// Group exponential.
    pub fn exp(&self, x: &Vector) -> Matrix {
        self.to_matrix(x).exp()
    }

    /// Principal logarithm, by inverse scaling and squaring.
    pub fn log(&self, g: &Matrix) -> Vector {
        self.from_matrix(&matrix_log(g))
    }

    pub fn inverse(&self, g: &Matrix) -> Matrix {
        match self.family {
            Family::Orthogonal => g.transpose(),
            Family::Unipotent => g.clone().try_inverse().expect("unipotent matrices are invertible"),
        }
    }

    /// `Ad_g x = g x g⁻¹` in coefficients.
    pub fn ad_group(&self, g: &Matrix, x: &Vector) -> Vector {
        self.from_matrix(&(g * self.to_matrix(x) * self.inverse(g)))
    }

    /// Matrix of `Ad_g` acting on coefficients.
    pub fn ad_group_matrix(&self, g: &Matrix) -> Matrix {
        let d = self.dim();
        let gi = self.inverse(g);
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let col = self.from_matrix(&(g * &self.basis[j] * &gi));
            m.set_column(j, &col);
        }
        m
    }

    /// Maurer–Cartan form evaluated on the tangent vector with right
    /// trivialization `v`.
    pub fn maurer_cartan(&self, g: &Matrix, v: &Vector, side: Side) -> Vector {
        match side {
            Side::Right => v.clone(),
            Side::Left => self.ad_group(&self.inverse(g), v),
        }
    }

    /// Distance of `g` from the group.
    pub fn membership_residual(&self, g: &Matrix) -> f64 {
        match self.family {
            Family::Orthogonal => {
                let mut r = (g.transpose() * g - self.identity()).norm();
                // The tangent algebra pins the connected component: the
                // logarithm must reproduce `g`.
                r += (self.exp(&self.log(g)) - g).norm();
                r
            }
            Family::Unipotent => {
                let mut r = 0.0;
                for i in 0..self.size {
                    r += (g[(i, i)] - 1.0).abs();
                    for j in 0..i {
                        r += g[(i, j)].abs();
                    }
                }
                r
            }
        }
    }

    /// Largest violation of `B([x,y],z) + B(y,[x,z]) = 0` over basis triples.
    pub fn invariance_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let r = self.dot(&self.bracket(&x, &y), &z) + self.dot(&y, &self.bracket(&x, &z));
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }

    /// Largest violation of the Jacobi identity over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (self.unit(i), self.unit(j), self.unit(k));
                    let r = self.bracket(&x, &self.bracket(&y, &z))
                        + self.bracket(&y, &self.bracket(&z, &x))
                        + self.bracket(&z, &self.bracket(&x, &y));
                    worst = worst.max(r.amax());
                }
            }
        }
        worst
    }

    /// Right-trivialized differential of `exp` at `u`:
    /// `d/dε exp(u + εa) exp(u)⁻¹ = Σ_k ad_u^k a / (k+1)!`.
    pub fn dexp(&self, u: &Vector, a: &Vector) -> Vector {
        let mut term = a.clone();
        let mut sum = a.clone();
        for k in 1..40 {
            term = self.bracket(u, &term) / (k as f64 + 1.0);
            sum += &term;
            if term.amax() < 1e-18 {
                break;
            }
        }
        sum
    }

    /// Matrix of [`LieAlgebra::dexp`] at `u`.
    pub fn dexp_matrix(&self, u: &Vector) -> Matrix {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            m.set_column(j, &self.dexp(u, &self.unit(j)));
        }
        m
    }
}

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Principal matrix logarithm for matrices without eigenvalues on the closed
/// negative real axis.
pub fn matrix_log(g: &Matrix) -> Matrix {
    let n = g.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut x = g.clone();
    let mut squarings = 0;
    while (&x - &id).norm() > 0.2 && squarings < 40 {
        x = sqrt_denman_beavers(&x);
        squarings += 1;
    }
    let y = &x - &id;
    let mut power = y.clone();
    let mut sum = y.clone();
    for k in 2..60 {
        power = &power * &y;
        let term = &power * (if k % 2 == 0 { -1.0 } else { 1.0 } / k as f64);
        sum += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum * 2f64.powi(squarings)
}

fn sqrt_denman_beavers(a: &Matrix) -> Matrix {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<f64>::identity(n, n);
    for _ in 0..60 {
        let yi = y.clone().try_inverse().expect("square root iteration stays invertible");
        let zi = z.clone().try_inverse().expect("square root iteration stays invertible");
        let ny = (&y + &zi) * 0.5;
        let nz = (&z + &yi) * 0.5;
        let done = (&ny - &y).norm() < 1e-15 * ny.norm().max(1.0);
        y = ny;
        z = nz;
        if done {
            break;
        }
    }
    y
}

/// Which Maurer–Cartan form to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Step sizes for finite differences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Steps {
    /// Step along group directions.
    pub group: f64,
    /// Step in the path parameter.
    pub time: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Steps { group: 1e-4, time: 1e-5 }
    }
}

/// Richardson-extrapolated central difference of a vector-valued function of
/// a real parameter at 0.
pub fn richardson<F: Fn(f64) -> Vector>(f: F, h: f64) -> Vector {
    let d1 = (f(h) - f(-h)) / (2.0 * h);
    let d2 = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
    (d1 * 4.0 - d2) / 3.0
}

/// `d/ds F(exp(s v) g)` at `s = 0`.
pub fn directional_derivative<F: Fn(&Matrix) -> Vector>(
    alg: &LieAlgebra,
    f: F,
    g: &Matrix,
    v: &Vector,
    h: f64,
) -> Vector {
    if v.amax() == 0.0 {
        return f(g) * 0.0;
    }
    let vm = alg.to_matrix(v);
    richardson(|s| f(&((&vm * s).exp() * g)), h)
}

/// Checked variant of [`directional_derivative`] that rejects non-finite
/// values.
pub fn try_directional_derivative<F: Fn(&Matrix) -> Vector>(
    alg: &LieAlgebra,
    f: F,
    g: &Matrix,
    v: &Vector,
    h: f64,
) -> Result<Vector> {
    let d = directional_derivative(alg, f, g, v, h);
    if d.iter().all(|x| x.is_finite()) {
        Ok(d)
    } else {
        Err(Error::NonFinite)
    }
}

/// A fully symmetric multilinear form `p(x₁, …, x_m)` on the algebra.
#[derive(Clone)]
pub struct InvariantPolynomial {
    degree: usize,
    eval: Arc<dyn Fn(&[&Vector]) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for InvariantPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "InvariantPolynomial(degree {})", self.degree)
    }
}

impl InvariantPolynomial {
    pub fn new(degree: usize, eval: impl Fn(&[&Vector]) -> f64 + Send + Sync + 'static) -> Self {
        InvariantPolynomial { degree, eval: Arc::new(eval) }
    }

    /// `p(x) = ½ x·x`, polarized to `½ x·y`.
    pub fn half_square(alg: &LieAlgebra) -> Self {
        let alg = alg.clone();
        Self::new(2, move |xs| 0.5 * alg.dot(xs[0], xs[1]))
    }

    /// A cubic invariant, when the catalog algebra has one that is not
    /// identically zero. Abelian directions and the non-central Heisenberg
    /// coordinates are invariant; su(2) and so(3) carry none.
    pub fn cubic(alg: &LieAlgebra) -> Option<Self> {
        match alg.name() {
            "torus2" | "heisenberg3" => Some(Self::new(3, |xs| xs[0][0] * xs[1][0] * xs[2][0])),
            _ => None,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eval(&self, xs: &[&Vector]) -> f64 {
        (self.eval)(xs)
    }

    /// `p(x, …, x)`.
    pub fn eval_diagonal(&self, x: &Vector) -> f64 {
        let xs: Vec<&Vector> = (0..self.degree).map(|_| x).collect();
        self.eval(&xs)
    }

    /// `|p(Ad_g x₁, …) − p(x₁, …)|`.
    pub fn invariance_residual(&self, alg: &LieAlgebra, g: &Matrix, xs: &[Vector]) -> f64 {
        let moved: Vec<Vector> = xs.iter().map(|x| alg.ad_group(g, x)).collect();
        let a: Vec<&Vector> = moved.iter().collect();
        let b: Vec<&Vector> = xs.iter().collect();
        (self.eval(&a) - self.eval(&b)).abs()
    }
}
