//! Secret-sharing algebra: XOR sharing, Shamir sharing, Lagrange
//! interpolation and the per-group zero polynomials used to refresh
//! threshold shares without communication.

use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::field::{FieldElement, FieldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShareScheme {
    AdditiveGf2,
    Shamir { degree: usize },
}

/// Shares of one secret, indexed by 1-based agent number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareVector {
    pub scheme: ShareScheme,
    pub field: FieldSpec,
    /// Number of agents the secret was split among.
    pub parties: usize,
    pub shares: Vec<(usize, FieldElement)>,
}

impl ShareVector {
    pub fn values(&self) -> Vec<FieldElement> {
        self.shares.iter().map(|&(_, v)| v).collect()
    }
}

/// Splits a bit into `n` uniformly random bits whose XOR is `secret`.
pub fn additive_share_bit<R: RngCore + ?Sized>(secret: bool, n: usize, rng: &mut R) -> ShareVector {
    assert!(n >= 2, "additive sharing needs at least two parties");
    let mut shares: Vec<(usize, FieldElement)> = Vec::with_capacity(n);
    let mut acc = secret;
    for i in 1..n {
        let bit: bool = rng.random();
        acc ^= bit;
        shares.push((i, FieldElement::from_bool(bit)));
    }
    shares.push((n, FieldElement::from_bool(acc)));
    ShareVector {
        scheme: ShareScheme::AdditiveGf2,
        field: FieldSpec::gf2(),
        parties: n,
        shares,
    }
}

pub fn additive_reconstruct(v: &ShareVector) -> Result<bool> {
    let mut seen = vec![false; v.parties + 1];
    for &(i, _) in &v.shares {
        if i == 0 || i > v.parties {
            return Err(Error::InvalidParameters(format!(
                "agent index {i} out of range"
            )));
        }
        seen[i] = true;
    }
    let present = seen.iter().filter(|&&s| s).count();
    if present != v.parties || v.shares.len() != v.parties {
        return Err(Error::MissingShares {
            expected: v.parties,
            actual: present,
        });
    }
    Ok(v.shares
        .iter()
        .fold(false, |acc, &(_, x)| acc ^ (x.value() & 1 == 1)))
}

/// Shamir sharing with uniformly random coefficients c_1..c_t.
pub fn shamir_share<R: RngCore + ?Sized>(
    secret: FieldElement,
    t: usize,
    n: usize,
    f: &FieldSpec,
    rng: &mut R,
) -> Result<ShareVector> {
    f.check_agents(n)?;
    let coefficients: Vec<FieldElement> = (0..t).map(|_| random_element(f, rng)).collect();
    shamir_share_with_coefficients(secret, &coefficients, n, f)
}

/// Shamir sharing with caller-chosen coefficients c_1..c_t; share i is f(i).
pub fn shamir_share_with_coefficients(
    secret: FieldElement,
    coefficients: &[FieldElement],
    n: usize,
    f: &FieldSpec,
) -> Result<ShareVector> {
    f.check_agents(n)?;
    let t = coefficients.len();
    if n <= t {
        return Err(Error::InvalidParameters(format!(
            "need n > t, got n = {n}, t = {t}"
        )));
    }
    let mut poly = Vec::with_capacity(t + 1);
    poly.push(secret);
    poly.extend_from_slice(coefficients);
    let shares = (1..=n)
        .map(|i| (i, eval_poly(&poly, f.element(i as u64), f)))
        .collect();
    Ok(ShareVector {
        scheme: ShareScheme::Shamir { degree: t },
        field: *f,
        parties: n,
        shares,
    })
}

/// Horner evaluation of a coefficient vector (constant term first).
pub fn eval_poly(coefficients: &[FieldElement], x: FieldElement, f: &FieldSpec) -> FieldElement {
    coefficients
        .iter()
        .rev()
        .fold(FieldElement::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
}

/// Uniform element of `f`.
pub fn random_element<R: RngCore + ?Sized>(f: &FieldSpec, rng: &mut R) -> FieldElement {
    f.element(rng.random_range(0..f.modulus()))
}

/// Value at `x0` of the minimal-degree polynomial through `points`.
pub fn lagrange_at(
    points: &[(FieldElement, FieldElement)],
    x0: FieldElement,
    f: &FieldSpec,
) -> Result<FieldElement> {
    if points.is_empty() {
        return Err(Error::InvalidParameters(
            "interpolation needs at least one point".into(),
        ));
    }
    for (k, (x, _)) in points.iter().enumerate() {
        if points[..k].iter().any(|(other, _)| other == x) {
            return Err(Error::DuplicateX);
        }
    }
    let mut acc = FieldElement::ZERO;
    for (k, &(xk, yk)) in points.iter().enumerate() {
        if yk.is_zero() {
            continue;
        }
        let mut num = FieldElement::ONE;
        let mut den = FieldElement::ONE;
        for (l, &(xl, _)) in points.iter().enumerate() {
            if l != k {
                num = f.mul(num, f.sub(x0, xl));
                den = f.mul(den, f.sub(xk, xl));
            }
        }
        acc = f.add(acc, f.mul(yk, f.mul(num, f.inv(den)?)));
    }
    Ok(acc)
}

/// Recovers a Shamir secret from indexed shares by interpolating at 0.
pub fn shamir_reconstruct(shares: &[(usize, FieldElement)], f: &FieldSpec) -> Result<FieldElement> {
    let points: Vec<_> = shares
        .iter()
        .map(|&(i, y)| (f.element(i as u64), y))
        .collect();
    lagrange_at(&points, FieldElement::ZERO, f)
}

/// True iff all points lie on one polynomial of degree <= `degree`.
pub fn fits_degree(
    points: &[(FieldElement, FieldElement)],
    degree: usize,
    f: &FieldSpec,
) -> Result<bool> {
    if points.len() <= degree + 1 {
        return Ok(true);
    }
    let (basis, rest) = points.split_at(degree + 1);
    for &(x, y) in rest {
        if lagrange_at(basis, x, f)? != y {
            return Ok(false);
        }
    }
    Ok(true)
}

fn check_group(group: &[usize], t: usize, n: usize, i: usize) -> Result<()> {
    let expected = n + 1 - t;
    if t == 0 || t >= n || group.len() != expected {
        return Err(Error::BadGroupSize {
            expected,
            actual: group.len(),
        });
    }
    if !group.contains(&i) {
        return Err(Error::AgentNotInGroup {
            agent: i,
            group: format!("{group:?}"),
        });
    }
    Ok(())
}

/// Multiplier c with P^T(i) = c * b, where P^T is the degree-t polynomial
/// with P^T(0) = 0, P^T(i') = 0 for every agent i' outside the group and
/// P^T(min T) = b. It is the Lagrange basis polynomial for min T over those
/// t + 1 nodes, evaluated at i.
pub fn group_zero_poly_coefficient(
    group: &[usize],
    t: usize,
    n: usize,
    i: usize,
    f: &FieldSpec,
) -> Result<FieldElement> {
    check_group(group, t, n, i)?;
    f.check_agents(n)?;
    let k = *group.iter().min().expect("group is non-empty");
    let xi = f.element(i as u64);
    let xk = f.element(k as u64);
    let nodes = std::iter::once(0).chain((1..=n).filter(|a| !group.contains(a)));
    let mut num = FieldElement::ONE;
    let mut den = FieldElement::ONE;
    for z in nodes {
        let xz = f.element(z as u64);
        num = f.mul(num, f.sub(xi, xz));
        den = f.mul(den, f.sub(xk, xz));
    }
    Ok(f.mul(num, f.inv(den)?))
}

pub fn group_zero_poly_eval(
    group: &[usize],
    t: usize,
    n: usize,
    b: FieldElement,
    i: usize,
    f: &FieldSpec,
) -> Result<FieldElement> {
    Ok(f.mul(b, group_zero_poly_coefficient(group, t, n, i, f)?))
}
