import string

import pytest


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A randomly initialized extractive-QA checkpoint built fully offline.

    Random weights give arbitrary predictions, which is exactly what the
    protocol tests need: the wire contract must hold regardless of model
    quality. Weights are seeded so runs are reproducible.
    """
    torch = pytest.importorskip("torch")
    from transformers import BertConfig, BertForQuestionAnswering, BertTokenizerFast

    directory = tmp_path_factory.mktemp("tiny-qa-model")
    letters = list(string.ascii_lowercase) + list(string.digits)
    vocab = (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + letters
        + [f"##{ch}" for ch in letters]
        + ["patients", "study", "hospital", "imaging", "how", "many", "the", "was", "were"]
    )
    vocab_file = directory / "vocab.txt"
    vocab_file.write_text("\n".join(vocab), encoding="utf-8")
    tokenizer = BertTokenizerFast(vocab_file=str(vocab_file), model_max_length=128)

    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=128,
    )
    torch.manual_seed(20200622)
    model = BertForQuestionAnswering(config)
    model.save_pretrained(directory)
    tokenizer.save_pretrained(directory)
    return str(directory)
