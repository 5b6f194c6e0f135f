//! Score functions. Lower scores mean more plausible triples.

use crate::error::{Error, Result};
use crate::graph::Triple;

use super::config::{ModelConfig, ModelKind};
use super::space::EmbeddingSpace;

/// `||x||_p` for `p` in {1, 2}.
#[inline]
pub fn norm(x: &[f64], p: u8) -> f64 {
    match p {
        1 => x.iter().map(|v| v.abs()).sum(),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

/// `||a + b - c||_p` without allocating.
#[inline]
pub(crate) fn translation_distance(a: &[f64], b: &[f64], c: &[f64], p: u8) -> f64 {
    let it = a.iter().zip(b).zip(c).map(|((a, b), c)| a + b - c);
    match p {
        1 => it.map(f64::abs).sum(),
        _ => it.map(|v| v * v).sum::<f64>().sqrt(),
    }
}

pub(crate) fn check_ids(space: &EmbeddingSpace, t: Triple) -> Result<()> {
    for e in [t.head, t.tail] {
        if e.index() >= space.entity_count() {
            return Err(Error::UnknownEntity(e.to_string()));
        }
    }
    if t.relation.index() >= space.relation_count() {
        return Err(Error::UnknownRelation(t.relation.to_string()));
    }
    Ok(())
}

/// `||h + r - t||_p`
pub fn score_transe(space: &EmbeddingSpace, t: Triple, config: &ModelConfig) -> Result<f64> {
    check_ids(space, t)?;
    Ok(transe_unchecked(space, t, config.norm_p))
}

/// `w1 ||h_i + r_i - t_i|| + w2 ||h_j + t_j - r_j|| + w3 ||t_k + r_k - h_k|| - psi`
pub fn score_mde(space: &EmbeddingSpace, t: Triple, config: &ModelConfig) -> Result<f64> {
    check_ids(space, t)?;
    if space.sets().len() != 3 {
        return Err(Error::InvalidArgument("MDE scoring needs three embedding sets".into()));
    }
    Ok(mde_unchecked(space, t, config))
}

/// Dispatches on the space's model kind.
pub fn score(space: &EmbeddingSpace, t: Triple, config: &ModelConfig) -> Result<f64> {
    match space.model() {
        ModelKind::TransE => score_transe(space, t, config),
        ModelKind::Mde => score_mde(space, t, config),
    }
}

#[inline]
pub(crate) fn transe_unchecked(space: &EmbeddingSpace, t: Triple, p: u8) -> f64 {
    translation_distance(
        space.entity(0, t.head.index()),
        space.relation(0, t.relation.index()),
        space.entity(0, t.tail.index()),
        p,
    )
}

/// The three unweighted MDE distances.
#[inline]
pub(crate) fn mde_terms(space: &EmbeddingSpace, t: Triple, p: u8) -> [f64; 3] {
    let (h, r, tl) = (t.head.index(), t.relation.index(), t.tail.index());
    [
        translation_distance(space.entity(0, h), space.relation(0, r), space.entity(0, tl), p),
        translation_distance(space.entity(1, h), space.entity(1, tl), space.relation(1, r), p),
        translation_distance(space.entity(2, tl), space.relation(2, r), space.entity(2, h), p),
    ]
}

#[inline]
pub(crate) fn mde_unchecked(space: &EmbeddingSpace, t: Triple, config: &ModelConfig) -> f64 {
    let d = mde_terms(space, t, config.norm_p);
    let w = config.weights;
    w[0] * d[0] + w[1] * d[1] + w[2] * d[2] - config.psi
}

#[inline]
pub(crate) fn score_unchecked(space: &EmbeddingSpace, t: Triple, config: &ModelConfig) -> f64 {
    match space.model() {
        ModelKind::TransE => transe_unchecked(space, t, config.norm_p),
        ModelKind::Mde => mde_unchecked(space, t, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::space::{EmbeddingSet, Table};

    fn transe_space(h: &[f64], r: &[f64], t: &[f64]) -> EmbeddingSpace {
        let d = h.len();
        let entities = Table::from_vec(2, d, [h, t].concat()).unwrap();
        let relations = Table::from_vec(1, d, r.to_vec()).unwrap();
        EmbeddingSpace::from_sets(ModelKind::TransE, vec![EmbeddingSet { entities, relations }]).unwrap()
    }

    fn cfg(p: u8) -> ModelConfig {
        ModelConfig {
            norm_p: p,
            ..ModelConfig::transe()
        }
    }

    const T: Triple = Triple {
        head: crate::graph::EntityId(0),
        relation: crate::graph::RelationId(0),
        tail: crate::graph::EntityId(1),
    };

    #[test]
    fn exact_translation_scores_zero() {
        let s = transe_space(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]);
        assert_eq!(score_transe(&s, T, &cfg(2)).unwrap(), 0.0);
    }

    #[test]
    fn three_four_five() {
        let s = transe_space(&[0.0, 0.0], &[0.0, 0.0], &[3.0, 4.0]);
        assert_eq!(score_transe(&s, T, &cfg(2)).unwrap(), 5.0);
    }

    #[test]
    fn l1_sums_absolute_values() {
        let s = transe_space(&[1.0, 2.0], &[1.0, 1.0], &[0.0, 0.0]);
        assert_eq!(score_transe(&s, T, &cfg(1)).unwrap(), 5.0);
    }

    #[test]
    fn unknown_ids_are_errors() {
        let s = transe_space(&[0.0], &[0.0], &[0.0]);
        assert!(matches!(
            score_transe(&s, Triple::new(2, 0, 0), &cfg(2)),
            Err(Error::UnknownEntity(_))
        ));
        assert!(matches!(
            score_transe(&s, Triple::new(0, 1, 0), &cfg(2)),
            Err(Error::UnknownRelation(_))
        ));
    }

    fn mde_space(sets: [(&[f64], &[f64], &[f64]); 3]) -> EmbeddingSpace {
        // each tuple is (head, relation, tail) for one set
        let sets = sets
            .iter()
            .map(|(h, r, t)| EmbeddingSet {
                entities: Table::from_vec(2, h.len(), [*h, *t].concat()).unwrap(),
                relations: Table::from_vec(1, r.len(), r.to_vec()).unwrap(),
            })
            .collect();
        EmbeddingSpace::from_sets(ModelKind::Mde, sets).unwrap()
    }

    #[test]
    fn mde_zero_space_is_minus_psi() {
        let z: &[f64] = &[0.0, 0.0];
        let s = mde_space([(z, z, z), (z, z, z), (z, z, z)]);
        let v = score_mde(&s, T, &ModelConfig::mde()).unwrap();
        assert!((v + 1.2).abs() < 1e-15);
    }

    #[test]
    fn mde_vanishing_terms() {
        let s = mde_space([
            (&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]),
            (&[1.0, 1.0], &[2.0, 1.0], &[1.0, 0.0]),
            (&[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0]),
        ]);
        let v = score_mde(&s, T, &ModelConfig::mde()).unwrap();
        assert!((v + 1.2).abs() < 1e-15, "{v}");
    }

    #[test]
    fn mde_needs_three_sets() {
        let s = transe_space(&[0.0], &[0.0], &[0.0]);
        assert!(score_mde(&s, T, &ModelConfig::mde()).is_err());
    }
}
