"""Walk-through: word2vec files, phrase vectors, and cosine distance.

A small store is serialized to both supported formats and reloaded; phrase
vectors average in-vocabulary terms so multiword topics and acronym
expansions can be matched.
"""

import math
import tempfile
from pathlib import Path

from oats.embeddings import (
    EmbeddingStore,
    cosine_distance,
    load_binary_format,
    load_text_format,
    min_distance_to_term,
    phrase_vector,
    save_binary_format,
    save_text_format,
)


def unit(angle_deg):
    rad = math.radians(angle_deg)
    return [math.cos(rad), math.sin(rad)]


def main():
    store = EmbeddingStore.from_pairs(
        [
            ("hypertension", unit(0)),
            ("hypertensive", unit(12)),
            ("diabetes", unit(85)),
            ("blood", unit(30)),
            ("pressure", unit(20)),
        ]
    )
    with tempfile.TemporaryDirectory() as tmp:
        text_path, bin_path = Path(tmp) / "v.txt", Path(tmp) / "v.bin"
        save_text_format(store, text_path)
        save_binary_format(store, bin_path)
        from_text = load_text_format(text_path)
        from_binary = load_binary_format(bin_path)
        print(f"text store: {len(from_text)} terms, dim {from_text.dim}")
        print(f"binary store: {len(from_binary)} terms, dim {from_binary.dim}")
        print(f"text file starts: {text_path.read_text()[:40]!r}")

    a, b = store.get("hypertension"), store.get("hypertensive")
    print(f"\ndistance(hypertension, hypertensive) = {cosine_distance(a, b):.4f}")
    print(f"distance(hypertension, diabetes)     = {cosine_distance(a, store.get('diabetes')):.4f}")

    phrase = phrase_vector(store, ["blood", "pressure"])
    print(f"\nphrase vector for 'blood pressure': {[round(float(c), 3) for c in phrase]}")

    result = min_distance_to_term(
        store,
        candidate_terms=[["diabetes"], ["hypertensive"], ["blood", "pressure"]],
        target=["hypertension"],
    )
    distance, best = result
    print(f"closest candidate to 'hypertension': {best} at distance {distance:.4f}")


if __name__ == "__main__":
    main()
