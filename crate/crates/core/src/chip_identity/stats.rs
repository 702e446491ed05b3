//! Uniqueness statistics in log10 space. `2^id_bits` is never materialized.

use super::ChipError;

/// How the chance of two chips sharing an ID is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollisionMode {
    /// `n / 2^bits`: the population size over the ID space.
    Linear,
    /// `n(n-1)/2 / 2^bits`: expected colliding pairs (union bound).
    Birthday,
}

/// log10 of the number of distinct IDs representable in `id_bits` bits.
pub fn information_quantity_log10(id_bits: u64) -> Result<f64, ChipError> {
    if id_bits == 0 {
        return Err(ChipError::ZeroBits);
    }
    Ok(id_bits as f64 * std::f64::consts::LOG10_2)
}

/// log10 of the probability that two chips of an `n_chips` population
/// share an ID.
pub fn collision_probability_log10(
    id_bits: u64,
    n_chips: u64,
    mode: CollisionMode,
) -> Result<f64, ChipError> {
    if n_chips < 2 {
        return Err(ChipError::DegeneratePopulation(n_chips));
    }
    let space = information_quantity_log10(id_bits)?;
    let n = n_chips as f64;
    let events = match mode {
        CollisionMode::Linear => n.log10(),
        CollisionMode::Birthday => n.log10() + (n - 1.0).log10() - std::f64::consts::LOG10_2,
    };
    Ok(events - space)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_bit_holds_two_states() {
        let q = information_quantity_log10(1).unwrap();
        assert!((10f64.powf(q) - 2.0).abs() < 1e-12);
        assert_eq!(information_quantity_log10(0), Err(ChipError::ZeroBits));
    }

    #[test]
    fn ten_bits_by_counting() {
        let states = (0u32..).take_while(|s| *s < 1 << 10).count() as f64;
        assert!((information_quantity_log10(10).unwrap() - states.log10()).abs() < 1e-12);
    }

    #[test]
    fn birthday_matches_pair_enumeration() {
        // Two 8-bit chips: count equal pairs among all 2^8 × 2^8 assignments.
        let equal = (0u32..256)
            .flat_map(|a| (0u32..256).map(move |b| (a, b)))
            .filter(|(a, b)| a == b)
            .count() as f64;
        let exact = (equal / 65536.0).log10();
        let got = collision_probability_log10(8, 2, CollisionMode::Birthday).unwrap();
        assert!((got - exact).abs() < 1e-12);
        assert!((got + 2.408).abs() < 1e-3);
    }

    #[test]
    fn two_one_bit_chips() {
        let got = collision_probability_log10(1, 2, CollisionMode::Birthday).unwrap();
        assert!((got - 0.5f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_population() {
        assert_eq!(
            collision_probability_log10(64, 1, CollisionMode::Linear),
            Err(ChipError::DegeneratePopulation(1))
        );
    }

    #[test]
    fn monotone_in_id_bits() {
        for bits in 1..2000u64 {
            assert!(information_quantity_log10(bits + 1).unwrap() > information_quantity_log10(bits).unwrap());
            for mode in [CollisionMode::Linear, CollisionMode::Birthday] {
                assert!(
                    collision_probability_log10(bits + 1, 1000, mode).unwrap()
                        < collision_probability_log10(bits, 1000, mode).unwrap()
                );
            }
        }
    }
}
