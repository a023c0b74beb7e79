//! Planted-model data generators.
//!
//! Labels are computed from a known form (and ideal point) in the orthonormal
//! coordinates of a random basis, so the planted model classifies every
//! generated comparison correctly. Comparisons whose planted difference is
//! smaller than `min_gap` in absolute value are redrawn.

use nalgebra::DVector;
use rand::Rng;

use crate::embedding::GramBasis;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::lab::{gaussian_vector, random_pd};
use crate::losses::Label;
use crate::mahalanobis::MahalanobisForm;
use crate::preference::{delta_pair, PairedSample};
use crate::triplet::{delta_triplet, TripletSample};

const MAX_DRAWS: usize = 1_000_000;

/// `m` items drawn uniformly from `[-2, 2]^d` with a factorizable Gram matrix.
pub fn random_items<R: Rng>(
    rng: &mut R,
    spec: KernelSpec,
    m: usize,
    d: usize,
) -> Result<GramBasis> {
    for _ in 0..1000 {
        let items: Vec<Vec<f64>> = (0..m)
            .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        match GramBasis::build(spec, items) {
            Ok(basis) => return Ok(basis),
            Err(Error::LinearDependence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Numerical("could not draw independent items".into()))
}

#[derive(Debug, Clone)]
pub struct PlantedPreference {
    pub form: MahalanobisForm,
    pub ideal: DVector<f64>,
    pub samples: Vec<PairedSample>,
}

pub fn planted_preference<R: Rng>(
    rng: &mut R,
    basis: &GramBasis,
    n: usize,
    min_gap: f64,
) -> Result<PlantedPreference> {
    let m = basis.len();
    if m < 2 {
        return Err(Error::InvalidParameter("need at least two items".into()));
    }
    let form = random_pd(rng, m);
    let ideal = gaussian_vector(rng, m) * 0.5;
    let coords: Vec<DVector<f64>> = (0..m)
        .map(|i| basis.item_coords(i))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..MAX_DRAWS {
        if samples.len() == n {
            break;
        }
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
        if i == j {
            continue;
        }
        let delta = delta_pair(&form, &ideal, &coords[i], &coords[j])?;
        if delta.abs() < min_gap {
            continue;
        }
        let y = Label::from_sign(delta).expect("nonzero difference");
        samples.push(PairedSample::new(i, j, y)?);
    }
    if samples.len() < n {
        return Err(Error::Numerical(
            "gap too large for the planted model".into(),
        ));
    }
    Ok(PlantedPreference {
        form,
        ideal,
        samples,
    })
}

#[derive(Debug, Clone)]
pub struct PlantedTriplets {
    pub form: MahalanobisForm,
    pub samples: Vec<TripletSample>,
}

pub fn planted_triplets<R: Rng>(
    rng: &mut R,
    basis: &GramBasis,
    n: usize,
    min_gap: f64,
) -> Result<PlantedTriplets> {
    let m = basis.len();
    if m < 3 {
        return Err(Error::InvalidParameter("need at least three items".into()));
    }
    let form = random_pd(rng, m);
    let coords: Vec<DVector<f64>> = (0..m)
        .map(|i| basis.item_coords(i))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(n);
    for _ in 0..MAX_DRAWS {
        if samples.len() == n {
            break;
        }
        let (a, j, k) = (
            rng.random_range(0..m),
            rng.random_range(0..m),
            rng.random_range(0..m),
        );
        if a == j || a == k || j == k {
            continue;
        }
        let delta = delta_triplet(&form, &coords[a], &coords[j], &coords[k])?;
        if delta.abs() < min_gap {
            continue;
        }
        let y = Label::from_sign(delta).expect("nonzero difference");
        samples.push(TripletSample::new(a, j, k, y)?);
    }
    if samples.len() < n {
        return Err(Error::Numerical(
            "gap too large for the planted model".into(),
        ));
    }
    Ok(PlantedTriplets { form, samples })
}

/// Every sample followed by its label-flipped copy.
pub fn symmetrize_pairs(samples: &[PairedSample]) -> Vec<PairedSample> {
    samples.iter().flat_map(|s| [*s, s.flipped()]).collect()
}

/// Every triplet followed by its copy with the compared items exchanged.
pub fn symmetrize_triplets(samples: &[TripletSample]) -> Vec<TripletSample> {
    samples.iter().flat_map(|s| [*s, s.swapped()]).collect()
}
