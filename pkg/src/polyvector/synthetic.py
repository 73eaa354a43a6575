"""Deterministic synthetic statute for offline tests and demos.

The generated text follows the drafting conventions the parser recognises:
titles, chapters, sections and subsections group numbered articles, which
carry a caput, incisos, alíneas and paragraphs. Wording is drawn from a fixed
vocabulary with a seeded generator so every run produces the same document.
"""

from __future__ import annotations

import random

from .document_model import NormIdentity

SYNTHETIC_NORM = NormIdentity(
    full_name="Estatuto Sintético de Teste",
    short_name="EST",
    urn_base="urn:lex:br:federal:lei:2020-01-01;9999",
)

_SUBJECTS = [
    "a administração pública", "o conselho municipal", "a autoridade sanitária", "o órgão ambiental",
    "a comissão permanente", "o tribunal de contas", "a agência reguladora", "o fundo de participação",
    "a defensoria regional", "o comitê consultivo", "a ouvidoria", "o serviço de arquivo",
]
_VERBS = [
    "assegurará", "fiscalizará", "promoverá", "regulamentará", "divulgará", "coordenará",
    "planejará", "avaliará", "registrará", "custeará",
]
_OBJECTS = [
    "o acesso às bibliotecas rurais", "a conservação das nascentes", "o transporte escolar noturno",
    "a vacinação de animais domésticos", "a iluminação das praças", "o cadastro de pescadores artesanais",
    "a coleta seletiva de resíduos", "a manutenção das estradas vicinais", "o atendimento de idosos",
    "a formação de professores", "o controle de enchentes", "a proteção do patrimônio histórico",
    "o fomento às cooperativas", "a segurança das barragens", "o abastecimento de água potável",
    "a fiscalização de feiras livres",
]
_QUALIFIERS = [
    "na forma da lei", "mediante prévia consulta pública", "observado o orçamento anual",
    "com prioridade para as regiões de fronteira", "em regime de cooperação", "no prazo de noventa dias",
    "sem prejuízo de outras medidas", "com publicidade de todos os atos",
]
_THEMES = [
    "DAS DISPOSIÇÕES PRELIMINARES", "DOS SERVIÇOS ESSENCIAIS", "DO MEIO AMBIENTE", "DA EDUCAÇÃO BÁSICA",
    "DO PATRIMÔNIO", "DAS FINANÇAS LOCAIS", "DA SAÚDE COLETIVA", "DOS TRANSPORTES", "DA CULTURA",
    "DO CONTROLE EXTERNO", "DA PARTICIPAÇÃO SOCIAL", "DAS DISPOSIÇÕES FINAIS",
]

_ROMANS = ["I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X"]


def _sentence(rng: random.Random) -> str:
    return f"{rng.choice(_SUBJECTS).capitalize()} {rng.choice(_VERBS)} {rng.choice(_OBJECTS)}, {rng.choice(_QUALIFIERS)}"


def _clause(rng: random.Random) -> str:
    return f"{rng.choice(_OBJECTS)} {rng.choice(_QUALIFIERS)}"


def _article_lines(number: int, rng: random.Random) -> list[str]:
    ordinal = f"{number}º" if number < 10 else f"{number}."
    shape = number % 5
    lines = []
    if shape in (1, 3):
        lines.append(f"Art. {ordinal} {_sentence(rng)}:")
        for k in range(rng.randint(2, 4)):
            end = "." if k == 3 else ";"
            lines.append(f"{_ROMANS[k]} – {_clause(rng)}{end}")
            if shape == 3 and k == 0:
                lines[-1] = f"{_ROMANS[k]} – {_clause(rng)}:"
                lines.append(f"a) {_clause(rng)};")
                lines.append(f"b) {_clause(rng)};")
        lines[-1] = lines[-1].rstrip(";:.") + "."
    else:
        lines.append(f"Art. {ordinal} {_sentence(rng)}.")
    if shape == 2:
        lines.append(f"Parágrafo único. {_sentence(rng)}.")
    elif shape == 4:
        lines.append(f"§ 1º {_sentence(rng)}.")
        lines.append(f"§ 2º {_sentence(rng)}.")
    return lines


def synthetic_statute(n_articles: int = 30, seed: int = 7) -> str:
    """Source text of a fictitious statute with ``n_articles`` articles."""
    if n_articles < 1:
        raise ValueError("need at least one article")
    rng = random.Random(seed)
    lines = ["ESTATUTO SINTÉTICO DE TESTE", ""]
    n_titles = max(1, min(len(_ROMANS), (n_articles + 9) // 10))
    per_title = -(-n_articles // n_titles)
    theme = iter(_THEMES * 4)
    article = 1
    for t in range(n_titles):
        lines += [f"TÍTULO {_ROMANS[t]}", next(theme), ""]
        chapters = 2 if per_title >= 4 else 1
        for c in range(chapters):
            lines += [f"CAPÍTULO {_ROMANS[c]}", next(theme), ""]
            span = -(-per_title // chapters)
            sections = 2 if (t + c) % 2 == 0 and span >= 4 else 0
            for s in range(max(1, sections)):
                if sections:
                    lines += [f"Seção {_ROMANS[s]}", next(theme).title(), ""]
                    if s == 1 and t == 0:
                        lines += ["Subseção I", "Das Normas Gerais", ""]
                per_block = -(-span // max(1, sections))
                for _ in range(per_block):
                    if article > n_articles or article > (t + 1) * per_title:
                        break
                    lines += _article_lines(article, rng)
                    lines.append("")
                    article += 1
    while article <= n_articles:  # leftovers land in the last chapter
        lines += _article_lines(article, rng) + [""]
        article += 1
    return "\n".join(lines)
