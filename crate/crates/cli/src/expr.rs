//! Tiny expression evaluator for dispersion laws in one variable `k`:
//! numbers, `+ - * / ^`, parentheses, and the functions
//! `sin cos tan sqrt exp ln abs cosh sinh tanh`.

#[derive(Debug, Clone)]
pub enum Expr {
    Number(f64),
    Var,
    Unary(fn(f64) -> f64, Box<Expr>),
    Binary(char, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, k: f64) -> f64 {
        match self {
            Expr::Number(x) => *x,
            Expr::Var => k,
            Expr::Unary(f, inner) => f(inner.eval(k)),
            Expr::Binary(op, a, b) => {
                let (x, y) = (a.eval(k), b.eval(k));
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    '/' => x / y,
                    _ => x.powf(y),
                }
            }
        }
    }
}

pub fn parse(input: &str) -> Result<Expr, String> {
    let tokens = tokenize(input)?;
    let mut parser = Parser { tokens, pos: 0 };
    let expr = parser.expression(0)?;
    if parser.pos != parser.tokens.len() {
        return Err(format!("unexpected trailing input at token {}", parser.pos));
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(input: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => i += 1,
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token::Op(c));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_digit()
                        || chars[i] == '.'
                        || chars[i] == 'e'
                        || chars[i] == 'E'
                        || ((chars[i] == '+' || chars[i] == '-')
                            && i > start
                            && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                out.push(Token::Number(
                    text.parse().map_err(|_| format!("bad number `{text}`"))?,
                ));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expression(&mut self, min_prec: u8) -> Result<Expr, String> {
        let mut lhs = self.atom()?;
        while let Some(Token::Op(op)) = self.peek().cloned() {
            let (prec, right_assoc) = match op {
                '+' | '-' => (1, false),
                '*' | '/' => (2, false),
                '^' => (3, true),
                _ => break,
            };
            if prec < min_prec {
                break;
            }
            self.pos += 1;
            let next_min = if right_assoc { prec } else { prec + 1 };
            let rhs = self.expression(next_min)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, String> {
        match self.peek().cloned() {
            Some(Token::Number(x)) => {
                self.pos += 1;
                Ok(Expr::Number(x))
            }
            Some(Token::Op('-')) => {
                self.pos += 1;
                let inner = self.expression(4)?;
                Ok(Expr::Binary('-', Box::new(Expr::Number(0.0)), Box::new(inner)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.expression(4)
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expression(0)?;
                match self.peek() {
                    Some(Token::RParen) => {
                        self.pos += 1;
                        Ok(inner)
                    }
                    _ => Err("missing closing parenthesis".into()),
                }
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if name == "k" {
                    return Ok(Expr::Var);
                }
                if name == "pi" {
                    return Ok(Expr::Number(std::f64::consts::PI));
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "sqrt" => f64::sqrt,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "abs" => f64::abs,
                    "cosh" => f64::cosh,
                    "sinh" => f64::sinh,
                    "tanh" => f64::tanh,
                    other => return Err(format!("unknown identifier `{other}`")),
                };
                match self.peek() {
                    Some(Token::LParen) => {
                        self.pos += 1;
                        let arg = self.expression(0)?;
                        match self.peek() {
                            Some(Token::RParen) => {
                                self.pos += 1;
                                Ok(Expr::Unary(f, Box::new(arg)))
                            }
                            _ => Err(format!("missing `)` after {name}(...")),
                        }
                    }
                    _ => Err(format!("function `{name}` needs parentheses")),
                }
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }
}
