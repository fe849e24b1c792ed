#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use twinterf::amplitudes::ModeVector;
use twinterf::splitters::{Convention, Element, NetworkDescription};
use twinterf::Complex64;

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

pub fn random_mode<R: Rng>(rng: &mut R, n: usize) -> ModeVector {
    loop {
        let v = random_complex(rng, n);
        if v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3 {
            return ModeVector::normalized(v).unwrap();
        }
    }
}

/// A second column orthogonal to `a`.
pub fn orthogonal_to<R: Rng>(rng: &mut R, a: &ModeVector) -> ModeVector {
    loop {
        let b = random_mode(rng, a.dim());
        let c = a.inner(&b).unwrap();
        let rest: Vec<Complex64> = b
            .as_slice()
            .iter()
            .zip(a.as_slice())
            .map(|(bi, ai)| bi - c * ai)
            .collect();
        if rest.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3 {
            return ModeVector::normalized(rest).unwrap();
        }
    }
}

/// Random splitters between distinct modes, balanced half the time.
pub fn random_network<R: Rng>(rng: &mut R, dim: usize, elements: usize) -> NetworkDescription {
    let mut els = Vec::with_capacity(elements);
    for _ in 0..elements {
        let i = rng.gen_range(0..dim);
        let mut j = rng.gen_range(0..dim - 1);
        if j >= i {
            j += 1;
        }
        let r = if rng.gen_bool(0.5) {
            0.5
        } else {
            rng.gen_range(0.0..=1.0)
        };
        let convention = if rng.gen_bool(0.5) {
            Convention::Real
        } else {
            Convention::Symmetric
        };
        els.push(Element {
            i,
            j,
            r,
            convention,
        });
    }
    NetworkDescription {
        dim,
        elements: els,
        input_a: 0,
        input_b: dim - 1,
    }
}

/// Random network with every mode reachable: a random spanning tree plus
/// extra random elements, shuffled. `elements` must be at least `dim - 1`.
pub fn random_connected_network<R: Rng>(
    rng: &mut R,
    dim: usize,
    elements: usize,
) -> NetworkDescription {
    assert!(elements + 1 >= dim);
    let mut net = random_network(rng, dim, elements);
    for m in 1..dim {
        let e = &mut net.elements[m - 1];
        e.i = rng.gen_range(0..m);
        e.j = m;
        if rng.gen_bool(0.5) {
            std::mem::swap(&mut e.i, &mut e.j);
        }
    }
    net.elements.shuffle(rng);
    net
}
