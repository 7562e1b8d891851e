//! Articles and verb forms for question text.

use std::collections::BTreeSet;

/// Past forms that the regular rule gets wrong.
const IRREGULAR_PAST: &[(&str, &str)] = &[
    ("holding", "held"),
    ("sitting", "sat"),
    ("lying", "lay"),
    ("eating", "ate"),
    ("drinking", "drank"),
    ("wearing", "wore"),
    ("taking", "took"),
    ("putting", "put"),
    ("throwing", "threw"),
    ("reading", "read"),
    ("getting", "got"),
    ("running", "ran"),
];

/// Words starting with a vowel letter but a consonant sound, and the reverse.
const CONSONANT_SOUND: &[&str] = &["one", "uniform", "university", "user", "utensil"];
const VOWEL_SOUND: &[&str] = &["hour", "honest"];

fn vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// "a"/"an" by the first word's initial sound; mass nouns take none.
pub fn with_article(noun: &str, mass_nouns: &BTreeSet<String>) -> String {
    if mass_nouns.contains(noun) {
        return noun.to_string();
    }
    let first = noun.split_whitespace().next().unwrap_or("");
    let an = if VOWEL_SOUND.contains(&first) {
        true
    } else if CONSONANT_SOUND.contains(&first) {
        false
    } else {
        first.chars().next().is_some_and(vowel)
    };
    format!("{} {noun}", if an { "an" } else { "a" })
}

/// Simple past of a gerund phrase: "leaning on" becomes "leaned on".
pub fn past(gerund: &str) -> String {
    let (head, rest) = match gerund.split_once(' ') {
        Some((h, r)) => (h, Some(r)),
        None => (gerund, None),
    };
    let word = match IRREGULAR_PAST.iter().find(|(g, _)| *g == head) {
        Some((_, p)) => p.to_string(),
        None => match head.strip_suffix("ing") {
            Some(stem) => regular_past(stem),
            None => head.to_string(),
        },
    };
    match rest {
        Some(r) => format!("{word} {r}"),
        None => word,
    }
}

fn regular_past(stem: &str) -> String {
    let chars: Vec<char> = stem.chars().collect();
    match chars.as_slice() {
        [.., a, 'y'] if !vowel(*a) => format!("{}ied", &stem[..stem.len() - 1]),
        [.., 'e'] => format!("{stem}d"),
        _ => format!("{stem}ed"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn articles() {
        let mass: BTreeSet<String> = ["food".to_string()].into();
        assert_eq!(with_article("bottle", &mass), "a bottle");
        assert_eq!(with_article("apple", &mass), "an apple");
        assert_eq!(with_article("food", &mass), "food");
        assert_eq!(with_article("uniform", &mass), "a uniform");
    }

    #[test]
    fn past_forms() {
        for (g, p) in [
            ("holding", "held"),
            ("wiping", "wiped"),
            ("carrying", "carried"),
            ("playing with", "played with"),
            ("closing", "closed"),
            ("snuggling with", "snuggled with"),
            ("leaning on", "leaned on"),
            ("throwing", "threw"),
            ("tidying", "tidied"),
        ] {
            assert_eq!(past(g), p, "{g}");
        }
    }
}
