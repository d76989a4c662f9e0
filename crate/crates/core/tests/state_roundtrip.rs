mod common;

use common::strategies::{belief_value, state};
use goalsim::codec::{self, decode_state, encode_state, CodecError, Kind};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn states_survive_encoding(s in state()) {
        let bytes = encode_state(&s).unwrap();
        let back = decode_state(&bytes).unwrap();
        prop_assert_eq!(&back, &s);
        // byte-stable: a numeric type flip would still compare equal above
        prop_assert_eq!(encode_state(&back).unwrap(), bytes);
    }

    #[test]
    fn values_survive_encoding(v in belief_value()) {
        let bytes = codec::encode(Kind::State, &v).unwrap();
        let back: goalsim::beliefs::BeliefValue = codec::decode(Kind::State, &bytes).unwrap();
        prop_assert_eq!(codec::encode(Kind::State, &back).unwrap(), bytes);
    }

    #[test]
    fn truncated_input_never_panics(s in state(), cut in 0usize..64) {
        let bytes = encode_state(&s).unwrap();
        let n = bytes.len().saturating_sub(cut + 1);
        let _: Result<_, CodecError> = decode_state(&bytes[..n]);
    }
}
