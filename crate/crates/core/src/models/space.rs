use rand::Rng;

use super::config::ModelKind;

/// Row-major `rows x dim` block of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl Table {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Table {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == rows * dim).then_some(Table { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Entity and relation vectors sharing one index family.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub entities: Table,
    pub relations: Table,
}

/// Learned vectors. TransE has one set; MDE has three independent sets used
/// by its three distance terms.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    model: ModelKind,
    dim: usize,
    sets: Vec<EmbeddingSet>,
}

impl EmbeddingSpace {
    pub fn zeros(model: ModelKind, entity_count: usize, relation_count: usize, dim: usize) -> Self {
        let sets = (0..model.sets())
            .map(|_| EmbeddingSet {
                entities: Table::zeros(entity_count, dim),
                relations: Table::zeros(relation_count, dim),
            })
            .collect();
        EmbeddingSpace { model, dim, sets }
    }

    pub fn from_sets(model: ModelKind, sets: Vec<EmbeddingSet>) -> Option<Self> {
        let first = sets.first()?;
        let (dim, ne, nr) = (first.entities.dim(), first.entities.rows(), first.relations.rows());
        let consistent = sets.len() == model.sets()
            && sets.iter().all(|s| {
                s.entities.dim() == dim
                    && s.relations.dim() == dim
                    && s.entities.rows() == ne
                    && s.relations.rows() == nr
            });
        consistent.then_some(EmbeddingSpace { model, dim, sets })
    }

    /// Components drawn uniformly from `[-6/sqrt(dim), 6/sqrt(dim)]`.
    pub fn uniform<R: Rng>(
        model: ModelKind,
        entity_count: usize,
        relation_count: usize,
        dim: usize,
        rng: &mut R,
    ) -> Self {
        let mut space = Self::zeros(model, entity_count, relation_count, dim);
        let bound = 6.0 / (dim as f64).sqrt();
        for set in &mut space.sets {
            for x in set
                .entities
                .as_mut_slice()
                .iter_mut()
                .chain(set.relations.as_mut_slice())
            {
                *x = rng.random_range(-bound..=bound);
            }
        }
        space
    }

    pub fn model(&self) -> ModelKind {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entity_count(&self) -> usize {
        self.sets[0].entities.rows()
    }

    pub fn relation_count(&self) -> usize {
        self.sets[0].relations.rows()
    }

    pub fn sets(&self) -> &[EmbeddingSet] {
        &self.sets
    }

    pub fn set(&self, i: usize) -> &EmbeddingSet {
        &self.sets[i]
    }

    pub fn set_mut(&mut self, i: usize) -> &mut EmbeddingSet {
        &mut self.sets[i]
    }

    #[inline]
    pub fn entity(&self, set: usize, id: usize) -> &[f64] {
        self.sets[set].entities.row(id)
    }

    #[inline]
    pub fn relation(&self, set: usize, id: usize) -> &[f64] {
        self.sets[set].relations.row(id)
    }

    pub fn is_finite(&self) -> bool {
        self.sets.iter().all(|s| {
            s.entities
                .as_slice()
                .iter()
                .chain(s.relations.as_slice())
                .all(|x| x.is_finite())
        })
    }

    /// Scales every entity vector of every set to unit L2 norm. Zero
    /// vectors are left as they are.
    pub fn normalize_entities(&mut self) {
        for set in &mut self.sets {
            for i in 0..set.entities.rows() {
                let row = set.entities.row_mut(i);
                let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    row.iter_mut().for_each(|x| *x /= n);
                }
            }
        }
    }

    pub fn normalize_relations(&mut self) {
        for set in &mut self.sets {
            for i in 0..set.relations.rows() {
                let row = set.relations.row_mut(i);
                let n = row.iter().map(|x| x * x).sum::<f64>().sqrt();
                if n > 0.0 {
                    row.iter_mut().for_each(|x| *x /= n);
                }
            }
        }
    }
}
