//! String normalization, Soundex and edit distance.

/// Uppercases, drops punctuation and collapses whitespace.
pub fn normalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.extend(ch.to_uppercase());
        } else if ch.is_whitespace() {
            pending_space = true;
        }
    }
    out
}

pub fn digits_only(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_digit()).collect()
}

/// American Soundex: first letter plus three digits, zero padded.
pub fn soundex(s: &str) -> String {
    fn code(c: char) -> Option<char> {
        match c {
            'B' | 'F' | 'P' | 'V' => Some('1'),
            'C' | 'G' | 'J' | 'K' | 'Q' | 'S' | 'X' | 'Z' => Some('2'),
            'D' | 'T' => Some('3'),
            'L' => Some('4'),
            'M' | 'N' => Some('5'),
            'R' => Some('6'),
            _ => None,
        }
    }
    let letters: Vec<char> = s.chars().filter(|c| c.is_ascii_alphabetic()).map(|c| c.to_ascii_uppercase()).collect();
    let Some(&first) = letters.first() else {
        return String::new();
    };
    let mut out = String::with_capacity(4);
    out.push(first);
    let mut last = code(first);
    for &c in &letters[1..] {
        if out.len() == 4 {
            break;
        }
        let cur = code(c);
        match cur {
            Some(d) if cur != last => out.push(d),
            _ => {}
        }
        // H and W do not separate letters with the same code; vowels do.
        if c != 'H' && c != 'W' {
            last = cur;
        }
    }
    while out.len() < 4 {
        out.push('0');
    }
    out
}

/// Levenshtein distance over chars.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// True when the Levenshtein distance is at most one, without a full table.
pub fn within_one_edit(a: &str, b: &str) -> bool {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let (short, long) = if a.len() <= b.len() { (&a, &b) } else { (&b, &a) };
    if long.len() - short.len() > 1 {
        return false;
    }
    let prefix = short.iter().zip(long.iter()).take_while(|(x, y)| x == y).count();
    if short.len() == long.len() {
        short[prefix..].iter().skip(1).eq(long[prefix..].iter().skip(1)) || prefix == short.len()
    } else {
        short[prefix..] == long[prefix + 1..]
    }
}

/// `1 - dist / max_len`, 1.0 for two empty strings.
pub fn edit_similarity(a: &str, b: &str) -> f64 {
    let max_len = a.chars().count().max(b.chars().count());
    if max_len == 0 {
        return 1.0;
    }
    1.0 - levenshtein(a, b) as f64 / max_len as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("  o'Brien "), "OBRIEN");
        assert_eq!(normalize("12  Oak St."), "12 OAK ST");
        assert_eq!(digits_only("(555) 123-4567"), "5551234567");
    }

    #[test]
    fn soundex_known_codes() {
        assert_eq!(soundex("ROBERT"), "R163");
        assert_eq!(soundex("RUPERT"), "R163");
        assert_eq!(soundex("ASHCRAFT"), "A261");
        assert_eq!(soundex("TYMCZAK"), "T522");
        assert_eq!(soundex("PFISTER"), "P236");
        assert_eq!(soundex("SMITH"), soundex("SMYTH"));
        assert_eq!(soundex("LEE"), "L000");
        assert_eq!(soundex(""), "");
    }

    #[test]
    fn distances() {
        assert_eq!(levenshtein("SMITH", "SMYTH"), 1);
        assert_eq!(levenshtein("KITTEN", "SITTING"), 3);
        assert_eq!(levenshtein("", "ABC"), 3);
        assert!((edit_similarity("SMITH", "SMYTH") - 0.8).abs() < 1e-12);
        assert_eq!(edit_similarity("", ""), 1.0);
    }

    proptest! {
        #[test]
        fn within_one_matches_levenshtein(a in "[ABC]{0,6}", b in "[ABC]{0,6}") {
            prop_assert_eq!(within_one_edit(&a, &b), levenshtein(&a, &b) <= 1);
        }

        #[test]
        fn levenshtein_symmetric(a in "[A-E]{0,8}", b in "[A-E]{0,8}") {
            prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        }
    }
}
