from qa_service.model import LexicalBackend, load_backend


def test_overlap_selects_matching_sentence():
    backend = LexicalBackend()
    context = "The ward opened early. A total of 645 patients were enrolled. Audits came later."
    prediction = backend.predict("How many patients were enrolled?", context)
    assert prediction.answered
    assert prediction.text == "A total of 645 patients were enrolled."
    assert context[prediction.start : prediction.end] == prediction.text
    assert 0.0 < prediction.score <= 1.0


def test_no_shared_content_words_declines():
    backend = LexicalBackend()
    prediction = backend.predict(
        "Which vaccine was evaluated?", "Imaging reviews happened daily. Scans stayed stable."
    )
    assert not prediction.answered
    assert prediction.text == "" and prediction.start is None and prediction.end is None
    assert prediction.no_answer_score == 1.0


def test_stopword_only_question_declines():
    backend = LexicalBackend()
    prediction = backend.predict("What is this?", "Numbers were recorded in a ledger.")
    assert not prediction.answered


def test_best_overlap_wins_and_is_deterministic():
    backend = LexicalBackend()
    context = (
        "Patients visited weekly. "
        "Enrolled patients with hypertension were counted. "
        "Hypertension appeared elsewhere too."
    )
    first = backend.predict("Were patients with hypertension enrolled?", context)
    assert first.answered
    assert first.text == "Enrolled patients with hypertension were counted."
    for _ in range(3):
        assert backend.predict("Were patients with hypertension enrolled?", context) == first


def test_unicode_offsets():
    backend = LexicalBackend()
    context = "Résumé notes \U0001f9ec arrived. 42 patients were admitted."
    prediction = backend.predict("How many patients were admitted?", context)
    assert prediction.answered
    assert context[prediction.start : prediction.end] == prediction.text


def test_loader_selects_lexical():
    backend = load_backend("lexical")
    assert isinstance(backend, LexicalBackend)
    assert backend.name == "lexical"
