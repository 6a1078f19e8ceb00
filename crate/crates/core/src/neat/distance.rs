use std::cmp::Ordering;

use super::genome::{ConnectionGene, Genome};

/// Weights of the compatibility distance `c1 * G + c2 * W̄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompatCoefficients {
    /// Weight of the non-matching gene count.
    pub c1: f64,
    /// Weight of the mean absolute weight difference of matching genes.
    pub c2: f64,
}

impl Default for CompatCoefficients {
    fn default() -> Self {
        CompatCoefficients { c1: 1.0, c2: 1.0 }
    }
}

impl CompatCoefficients {
    pub fn new(c1: f64, c2: f64) -> Option<Self> {
        (c1 >= 0.0 && c2 >= 0.0 && (c1 > 0.0 || c2 > 0.0)).then_some(CompatCoefficients { c1, c2 })
    }
}

/// Result of aligning two gene lists by innovation number.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Alignment {
    /// Genes present in exactly one of the genomes (disjoint and excess together).
    pub non_matching: usize,
    pub matching: usize,
    /// Sum of `|w_a - w_b|` over matching genes.
    pub weight_diff_sum: f64,
}

impl Alignment {
    pub fn mean_weight_diff(&self) -> f64 {
        if self.matching == 0 {
            0.0
        } else {
            self.weight_diff_sum / self.matching as f64
        }
    }
}

/// Linear merge of two innovation-sorted gene lists. Disabled genes take part.
pub fn align(a: &[ConnectionGene], b: &[ConnectionGene]) -> Alignment {
    let (mut i, mut j) = (0, 0);
    let mut out = Alignment::default();
    while i < a.len() && j < b.len() {
        match a[i].innovation.cmp(&b[j].innovation) {
            Ordering::Equal => {
                out.matching += 1;
                out.weight_diff_sum += (a[i].weight - b[j].weight).abs();
                i += 1;
                j += 1;
            }
            Ordering::Less => {
                out.non_matching += 1;
                i += 1;
            }
            Ordering::Greater => {
                out.non_matching += 1;
                j += 1;
            }
        }
    }
    out.non_matching += (a.len() - i) + (b.len() - j);
    out
}

/// Compatibility distance `δ = c1·G + c2·W̄`.
pub fn compatibility_distance(a: &Genome, b: &Genome, coeffs: CompatCoefficients) -> f64 {
    let al = align(a.connections(), b.connections());
    coeffs.c1 * al.non_matching as f64 + coeffs.c2 * al.mean_weight_diff()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neat::genome::{NetworkShape, NodeGene, NodeKind};

    fn genome(genes: &[(u64, f64)]) -> Genome {
        // Each gene gets its own hidden target so pairs stay distinct.
        let mut nodes = NetworkShape::new(1, 1).fixed_nodes();
        let conns = genes
            .iter()
            .map(|&(innovation, weight)| {
                let target = 100 + innovation as u32;
                nodes.push(NodeGene {
                    id: target,
                    kind: NodeKind::Hidden,
                });
                ConnectionGene {
                    innovation,
                    source: 0,
                    target,
                    weight,
                    enabled: true,
                }
            })
            .collect();
        Genome::from_parts(nodes, conns).unwrap()
    }

    #[test]
    fn hand_aligned_example() {
        let a = genome(&[(1, 0.5), (2, 0.2), (3, -0.1)]);
        let b = genome(&[(1, 0.5), (2, 0.6), (4, 0.9), (5, -0.3)]);
        let al = align(a.connections(), b.connections());
        assert_eq!(al.non_matching, 3);
        assert_eq!(al.matching, 2);
        let d = compatibility_distance(&a, &b, CompatCoefficients::default());
        assert!((d - 3.2).abs() < 1e-12, "{d}");
    }

    #[test]
    fn self_distance_is_zero() {
        let a = genome(&[(1, 0.5), (7, -2.0)]);
        assert_eq!(compatibility_distance(&a, &a, CompatCoefficients::default()), 0.0);
    }

    #[test]
    fn no_matches_gives_c1_times_count() {
        let a = genome(&[(1, 0.5), (2, 0.1)]);
        let b = genome(&[(3, 0.5), (4, 0.1), (5, 3.0)]);
        let c = CompatCoefficients::new(0.7, 123.0).unwrap();
        assert!((compatibility_distance(&a, &b, c) - 0.7 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn coefficient_validation() {
        assert!(CompatCoefficients::new(0.0, 0.0).is_none());
        assert!(CompatCoefficients::new(-1.0, 1.0).is_none());
        assert!(CompatCoefficients::new(0.0, 1.0).is_some());
    }
}
