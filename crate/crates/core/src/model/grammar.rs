use super::Symbol;
use crate::error::{Error, Result};

/// A straight-line grammar: rule `i` (0-based) defines the non-terminal with
/// id `terminal_count + i`. Re-Pair rules have two symbols on the right-hand
/// side; MR-Re-Pair rules may have more.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Grammar {
    pub terminal_count: u32,
    pub rules: Vec<Vec<Symbol>>,
    pub sequence: Vec<Symbol>,
}

impl Grammar {
    pub fn new(terminal_count: u32) -> Self {
        Grammar {
            terminal_count,
            rules: Vec::new(),
            sequence: Vec::new(),
        }
    }

    /// Total symbol count `τ = σ + m`.
    pub fn tau(&self) -> u32 {
        self.terminal_count + self.rules.len() as u32
    }

    /// Appends a rule and returns its non-terminal.
    pub fn push_rule(&mut self, rhs: Vec<Symbol>) -> Symbol {
        debug_assert!(rhs.len() >= 2);
        debug_assert!(rhs.iter().all(|s| s.0 < self.tau()));
        let x = Symbol(self.tau());
        self.rules.push(rhs);
        x
    }

    pub fn is_terminal(&self, s: Symbol) -> bool {
        s.0 < self.terminal_count
    }

    pub fn rhs(&self, s: Symbol) -> Option<&[Symbol]> {
        s.0.checked_sub(self.terminal_count)
            .and_then(|i| self.rules.get(i as usize))
            .map(Vec::as_slice)
    }

    /// Grammar size: right-hand side symbols of all rules plus the final
    /// sequence.
    pub fn size(&self) -> usize {
        self.rules.iter().map(Vec::len).sum::<usize>() + self.sequence.len()
    }

    /// Checks that every rule only refers to earlier symbols and that the
    /// final sequence only uses defined symbols.
    pub fn validate(&self) -> Result<()> {
        for (i, rhs) in self.rules.iter().enumerate() {
            let limit = self.terminal_count + i as u32;
            if rhs.len() < 2 {
                return Err(Error::CorruptGrammar(format!("rule {i} has fewer than two symbols")));
            }
            if let Some(s) = rhs.iter().find(|s| s.0 >= limit) {
                return Err(Error::CorruptGrammar(format!(
                    "rule {i} refers to symbol {s} which is not defined before it"
                )));
            }
        }
        if let Some(s) = self.sequence.iter().find(|s| s.0 >= self.tau()) {
            return Err(Error::CorruptGrammar(format!("undefined symbol {s} in the final sequence")));
        }
        Ok(())
    }

    /// Expands a single symbol into terminals without recursion.
    pub fn expand_symbol(&self, s: Symbol, out: &mut Vec<Symbol>) {
        let mut stack = vec![s];
        while let Some(top) = stack.pop() {
            match self.rhs(top) {
                None => out.push(top),
                Some(rhs) => stack.extend(rhs.iter().rev()),
            }
        }
    }

    /// Expands the final sequence into the text it derives.
    pub fn expand(&self) -> Result<Vec<Symbol>> {
        self.validate()?;
        let mut out = Vec::new();
        for &s in &self.sequence {
            self.expand_symbol(s, &mut out);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::symbols;

    #[test]
    fn expands_nested_rules() {
        let mut g = Grammar::new(1);
        let x1 = g.push_rule(symbols(&[0, 0]));
        let x2 = g.push_rule(vec![x1, x1]);
        g.sequence = vec![x2, x2];
        assert_eq!(g.expand().unwrap(), symbols(&[0; 8]));
        assert_eq!(g.size(), 6);
    }

    #[test]
    fn deep_chain_does_not_recurse() {
        let mut g = Grammar::new(2);
        let mut last = g.push_rule(symbols(&[0, 1]));
        for _ in 0..200_000 {
            last = g.push_rule(vec![last, Symbol(1)]);
        }
        g.sequence = vec![last];
        assert_eq!(g.expand().unwrap().len(), 200_002);
    }

    #[test]
    fn forward_reference_is_rejected() {
        let g = Grammar {
            terminal_count: 2,
            rules: vec![symbols(&[0, 2])],
            sequence: symbols(&[2]),
        };
        assert!(matches!(g.expand(), Err(Error::CorruptGrammar(_))));
    }
}
