//! Finite-alphabet pmfs, channels and exact information measures.

mod binary;
mod channel;
mod measures;
mod pmf;

pub use binary::{binary_convolution, binary_entropy, binary_entropy_inverse, dsbs};
pub use channel::{bsc_channel, compose_markov, compose_markov_mixed, Channel, MAX_TIME_SHARING};
pub use measures::{
    conditional_mutual_information, entropy, entropy_of, kl_divergence, mutual_information,
};
pub use pmf::{Alphabet, JointPmf, MAX_CELLS, NORMALIZATION_TOLERANCE};

pub(crate) use binary::{bconv, hb, hb_inverse};
pub(crate) use measures::{cmi_table, entropy_slice, kl_slice, mi_table};

#[cfg(test)]
mod properties {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    fn stochastic_row(len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.001f64..1.0, len).prop_map(|r| {
            let t: f64 = r.iter().sum();
            r.into_iter().map(|m| m / t).collect()
        })
    }

    fn channel(inputs: usize, outputs: usize) -> impl Strategy<Value = Channel> {
        prop::collection::vec(stochastic_row(outputs), inputs)
            .prop_map(|rows| Channel::from_rows(&rows).unwrap())
    }

    proptest! {
        #[test]
        fn data_processing(p in 0.0f64..=0.5, cu in channel(2, 3), cv in channel(2, 2)) {
            let joint = compose_markov(&dsbs(p).unwrap(), &cu, &cv).unwrap();
            let i_uv = mutual_information(&joint, &["u"], &["v"]).unwrap();
            let i_uz = mutual_information(&joint, &["u"], &["z"]).unwrap();
            let i_xv = mutual_information(&joint, &["x"], &["v"]).unwrap();
            let i_xz = mutual_information(&joint, &["x"], &["z"]).unwrap();
            prop_assert!(i_uv <= i_uz.min(i_xv) + 1e-10);
            prop_assert!(i_uz.min(i_xv) <= i_xz + 1e-10);
            let chain_u = conditional_mutual_information(&joint, &["u"], &["z", "v"], &["x"]).unwrap();
            let chain_v = conditional_mutual_information(&joint, &["v"], &["x", "u"], &["z"]).unwrap();
            prop_assert!(chain_u <= 1e-10 && chain_v <= 1e-10);
        }

        #[test]
        fn gerber_lemma(p in 0.0f64..=0.5, cv in channel(2, 2)) {
            // H(x | v) >= h_b(h_b^{-1}(H(z | v)) * p)
            let joint = compose_markov(&dsbs(p).unwrap(), &Channel::identity(2).unwrap(), &cv).unwrap();
            let h_v = entropy_of(&joint, &["v"]).unwrap();
            let h_x_given_v = entropy_of(&joint, &["x", "v"]).unwrap() - h_v;
            let h_z_given_v = (entropy_of(&joint, &["z", "v"]).unwrap() - h_v).clamp(0.0, LN_2);
            let bound = hb(bconv(hb_inverse(h_z_given_v), p));
            prop_assert!(h_x_given_v >= bound - 1e-10);
        }

        #[test]
        fn measures_are_nonnegative(rows in prop::collection::vec(stochastic_row(4), 3)) {
            let joint = JointPmf::new(
                vec![Alphabet::new("a", 3).unwrap(), Alphabet::new("b", 2).unwrap(), Alphabet::new("c", 2).unwrap()],
                rows.concat().into_iter().map(|m| m / 3.0).collect(),
            ).unwrap();
            prop_assert!(mutual_information(&joint, &["a"], &["b"]).unwrap() >= 0.0);
            prop_assert!(conditional_mutual_information(&joint, &["a"], &["b"], &["c"]).unwrap() >= 0.0);
            let h = entropy(&joint);
            prop_assert!(h >= 0.0 && h <= (12f64).ln() + 1e-12);
        }
    }
}
