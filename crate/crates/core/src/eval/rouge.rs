use crate::lang::{units, Language};

/// Length of the longest common subsequence, O(n·m) time and O(min) space.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let (long, short) = if a.len() >= b.len() { (a, b) } else { (b, a) };
    let mut row = vec![0usize; short.len() + 1];
    for x in long {
        let mut diag = 0;
        for (j, y) in short.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[short.len()]
}

/// ROUGE-L F1 on a 0–100 scale. English compares whitespace tokens, Japanese characters.
pub fn rouge_l(candidate: &str, reference: &str, language: Language) -> f64 {
    let unit = language.default_unit();
    let c = units(candidate, unit);
    let r = units(reference, unit);
    rouge_l_units(&c, &r)
}

pub fn rouge_l_units<T: PartialEq>(candidate: &[T], reference: &[T]) -> f64 {
    if candidate.is_empty() || reference.is_empty() {
        return 0.0;
    }
    let lcs = lcs_len(candidate, reference) as f64;
    if lcs == 0.0 {
        return 0.0;
    }
    let precision = lcs / candidate.len() as f64;
    let recall = lcs / reference.len() as f64;
    100.0 * 2.0 * precision * recall / (precision + recall)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        assert_eq!(rouge_l("a b c d", "a c d e", Language::En), 75.0);
    }

    #[test]
    fn identity_and_empty() {
        assert_eq!(rouge_l("the red car", "the red car", Language::En), 100.0);
        assert_eq!(rouge_l("the red car", "", Language::En), 0.0);
        assert_eq!(rouge_l("", "x", Language::En), 0.0);
        assert_eq!(rouge_l("赤い車", "赤い車", Language::Ja), 100.0);
    }

    #[test]
    fn japanese_is_per_character() {
        // LCS of 赤い車 and 青い車 is い車: P = R = 2/3.
        let s = rouge_l("赤い車", "青い車", Language::Ja);
        assert!((s - 200.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn lcs_basics() {
        assert_eq!(lcs_len(b"ABCBDAB", b"BDCABA"), 4);
        assert_eq!(lcs_len::<u8>(b"", b"abc"), 0);
    }
}
