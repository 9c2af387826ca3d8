//! Caption and lemma normalization.
//!
//! Both sides of the lemma match go through the same rules: lowercase,
//! underscores become spaces, runs of whitespace collapse to one space, and
//! leading/trailing whitespace is dropped.

/// Normalized text plus a map from each normalized byte back to the byte
/// offset of the original character that produced it. `offsets` has one
/// extra trailing entry holding the original length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedText {
    pub text: String,
    pub offsets: Vec<usize>,
}

impl NormalizedText {
    /// Original byte range covering the normalized span `start..end`.
    pub fn original_span(&self, start: usize, end: usize) -> (usize, usize) {
        (self.offsets[start], self.offsets[end])
    }
}

fn is_separator(c: char) -> bool {
    c == '_' || c.is_whitespace()
}

pub fn normalize(input: &str) -> NormalizedText {
    let mut text = String::with_capacity(input.len());
    let mut offsets = Vec::with_capacity(input.len() + 1);
    let mut pending_space: Option<usize> = None;

    for (pos, c) in input.char_indices() {
        if is_separator(c) {
            if pending_space.is_none() {
                pending_space = Some(pos);
            }
            continue;
        }
        if let Some(space_pos) = pending_space.take() {
            if !text.is_empty() {
                text.push(' ');
                offsets.push(space_pos);
            }
        }
        if c.is_ascii() {
            text.push(c.to_ascii_lowercase());
            offsets.push(pos);
        } else {
            for lc in c.to_lowercase() {
                let before = text.len();
                text.push(lc);
                offsets.extend(std::iter::repeat_n(pos, text.len() - before));
            }
        }
    }
    offsets.push(input.len());
    NormalizedText { text, offsets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collapses_and_lowercases() {
        assert_eq!(normalize("The PUMA  store").text, "the puma store");
        assert_eq!(normalize("  ice   bear ").text, "ice bear");
        assert_eq!(normalize("Egyptian_cat").text, "egyptian cat");
        assert_eq!(normalize("").text, "");
        assert_eq!(normalize("\t\n").text, "");
    }

    #[test]
    fn offsets_point_back_into_original() {
        let src = "  Big\u{00C9}  Cat";
        let n = normalize(src);
        assert_eq!(n.text, "big\u{00E9} cat");
        assert_eq!(n.offsets.len(), n.text.len() + 1);
        let (s, e) = n.original_span(6, 9);
        assert_eq!(&src[s..e], "Cat");
        let (s, e) = n.original_span(0, 5);
        assert_eq!(&src[s..e], "Big\u{00C9}");
    }

    proptest! {
        #[test]
        fn idempotent(s in "\\PC{0,40}") {
            let once = normalize(&s).text;
            prop_assert_eq!(normalize(&once).text, once);
        }

        #[test]
        fn offsets_are_monotone(s in "[ a-zA-Z_\u{00C0}-\u{00FF}\u{0130}]{0,40}") {
            let n = normalize(&s);
            prop_assert_eq!(n.offsets.len(), n.text.len() + 1);
            prop_assert!(n.offsets.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
