"""
Utterance preprocessing

Lowercase, delete every character that is not alphanumeric, whitespace,
'?' or '!', and split '?' / '!' off as tokens of their own.
"""

KEPT_SYMBOLS = frozenset('?!')


def preprocess(text):
    """
    Tokenize an utterance

    Args:
        text: raw utterance text (may be empty)

    Returns:
        list of token strings, possibly empty

    >>> preprocess('Oh, really?!')
    ['oh', 'really', '?', '!']
    """
    pieces = []
    for ch in text.lower():
        if ch in KEPT_SYMBOLS:
            pieces.append(f' {ch} ')
        elif ch.isalnum() or ch.isspace():
            pieces.append(ch)
    return ''.join(pieces).split()
