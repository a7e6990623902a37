import json

import numpy as np
import pytest

from latred.data import ClassLabels, ExpressionMatrix
from latred.modelio import (
    FitConfig,
    fit_model,
    load_model,
    predict_model,
    save_model,
    write_predictions_csv,
)
from latred.synth import SynthSpec, gen_two_class


def _dataset(seed=1, n=24, p=20, shift=2.5):
    spec = SynthSpec(n=n, p=p, n_informative=6, shift=shift, seed=seed)
    return gen_two_class(spec)


def _cfg(**over):
    base = dict(method="PCA", select="welch", p_star=8, k_grid=(1, 2),
                seed=3, preprocess_enabled=False)
    base.update(over)
    return FitConfig(**base)


class TestFitConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="method"):
            FitConfig(method="ICA")
        with pytest.raises(ValueError, match="select"):
            FitConfig(select="anova")
        with pytest.raises(ValueError, match="p_star"):
            FitConfig(select="welch", p_star=None)
        with pytest.raises(ValueError, match="k must be"):
            FitConfig(k=0)
        with pytest.raises(ValueError, match="seed"):
            FitConfig(seed=-2)

    def test_select_none_needs_no_p_star(self):
        FitConfig(select="none", p_star=None, preprocess_enabled=False)


class TestFitModel:
    def test_loocv_picks_k_and_records_curve(self):
        m, y = _dataset()
        model = fit_model(m, y, _cfg())
        assert model.k_star in (1, 2)
        assert model.cv is not None
        assert model.cv.k_star == model.k_star
        assert len(model.selected_genes) == 8

    def test_fixed_k_skips_loocv(self):
        m, y = _dataset()
        model = fit_model(m, y, _cfg(k=2))
        assert model.k_star == 2
        assert model.cv is None

    def test_select_none_keeps_every_gene(self):
        m, y = _dataset(p=12)
        model = fit_model(m, y, _cfg(select="none", p_star=None, k=1))
        assert model.selected_genes == m.gene_ids

    def test_label_mismatch(self):
        m, y = _dataset()
        with pytest.raises(ValueError, match="labels"):
            fit_model(m.take_samples(range(10)), y, _cfg())

    def test_separable_data_predicts_training_labels(self):
        m, y = _dataset(shift=4.0)
        model = fit_model(m, y, _cfg())
        result = predict_model(model, m)
        assert np.mean(result.class_index == y.labels) >= 0.9


class TestPredictModel:
    def test_column_order_and_extra_genes_ignored(self):
        m, y = _dataset(seed=2)
        model = fit_model(m, y, _cfg())
        base = predict_model(model, m)

        # shuffle gene columns and append a decoy gene
        rng = np.random.default_rng(0)
        perm = rng.permutation(m.n_genes)
        shuffled = ExpressionMatrix(
            np.column_stack([m.values[:, perm], np.full(m.n_samples, 7.0)]),
            m.sample_ids,
            tuple(m.gene_ids[j] for j in perm) + ("decoy",),
        )
        again = predict_model(model, shuffled)
        assert np.array_equal(base.class_index, again.class_index)
        assert np.allclose(base.scores, again.scores, atol=0)

    def test_missing_gene_named_in_error(self):
        m, y = _dataset(seed=3)
        model = fit_model(m, y, _cfg())
        victim = model.selected_genes[0]
        keep = [j for j, g in enumerate(m.gene_ids) if g != victim]
        with pytest.raises(ValueError, match=f"missing required gene '{victim}'"):
            predict_model(model, m.take_genes(keep))

    def test_binary_scores_are_class1_posteriors(self):
        m, y = _dataset(seed=4)
        model = fit_model(m, y, _cfg())
        result = predict_model(model, m)
        assert result.scores.shape == (m.n_samples,)
        assert np.all((result.scores >= 0) & (result.scores <= 1))
        # score above half exactly when class 1 is predicted (binary LDA)
        assert np.array_equal(result.class_index, (result.scores > 0.5).astype(int))

    def test_predicted_names(self):
        m, y = _dataset(seed=5)
        model = fit_model(m, y, _cfg())
        result = predict_model(model, m)
        names = result.predicted_names()
        assert set(names) <= {"A", "B"}
        assert names[0] == y.class_names[result.class_index[0]]


class TestPersistence:
    def _roundtrip(self, tmp_path, cfg, seed=6):
        m, y = _dataset(seed=seed)
        model = fit_model(m, y, cfg)
        path = tmp_path / "model.json"
        save_model(model, path)
        return m, model, load_model(path), path

    @pytest.mark.parametrize("method", ["PCA", "RM"])
    def test_roundtrip_predictions_identical(self, tmp_path, method):
        m, orig, loaded, _ = self._roundtrip(tmp_path, _cfg(method=method))
        a = predict_model(orig, m)
        b = predict_model(loaded, m)
        assert np.array_equal(a.class_index, b.class_index)
        assert np.array_equal(a.scores, b.scores)

    def test_roundtrip_metadata(self, tmp_path):
        _, orig, loaded, _ = self._roundtrip(tmp_path, _cfg(method="RM"))
        assert loaded.method == "RM"
        assert loaded.class_names == orig.class_names
        assert loaded.k_star == orig.k_star
        assert loaded.selected_genes == orig.selected_genes
        assert loaded.cv is None
        assert np.array_equal(loaded.lda.means, orig.lda.means)

    def test_saved_bytes_deterministic(self, tmp_path):
        m, y = _dataset(seed=7)
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        save_model(fit_model(m, y, _cfg()), pa)
        save_model(fit_model(m, y, _cfg()), pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_file_is_plain_json_with_format_tag(self, tmp_path):
        _, _, _, path = self._roundtrip(tmp_path, _cfg())
        payload = json.loads(path.read_text())
        assert payload["format"] == "latred-model"
        assert payload["version"] == 1

    def test_rejects_foreign_json(self, tmp_path):
        path = tmp_path / "junk.json"
        path.write_text('{"hello": 1}')
        with pytest.raises(ValueError, match="not a model file"):
            load_model(path)

    def test_rejects_unknown_version(self, tmp_path):
        m, y = _dataset(seed=8)
        path = tmp_path / "model.json"
        save_model(fit_model(m, y, _cfg()), path)
        payload = json.loads(path.read_text())
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError, match="version"):
            load_model(path)

    def test_preprocess_replay_roundtrips(self, tmp_path):
        # expression-scale data with preprocessing on: the stored affine
        # map must reproduce the fit-time standardization for new samples
        rng = np.random.default_rng(9)
        vals = rng.uniform(120.0, 9000.0, size=(16, 10))
        vals[8:, :3] *= 1.7
        m = ExpressionMatrix(vals, tuple(f"s{i}" for i in range(16)),
                             tuple(f"g{j}" for j in range(10)))
        y = ClassLabels(np.repeat([0, 1], 8), ("a", "b"))
        cfg = FitConfig(method="PCA", select="welch", p_star=4, k_grid=(1,),
                        seed=0, preprocess_enabled=True)
        model = fit_model(m, y, cfg)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        a = predict_model(model, m)
        b = predict_model(loaded, m)
        assert np.array_equal(a.class_index, b.class_index)
        assert np.allclose(a.scores, b.scores, atol=1e-12)


class TestPredictionsCsv:
    def test_format(self, tmp_path):
        m, y = _dataset(seed=10)
        model = fit_model(m, y, _cfg())
        result = predict_model(model, m)
        path = tmp_path / "pred.csv"
        write_predictions_csv(result, path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "sample_id,class,score"
        assert len(lines) == 1 + m.n_samples
        sid, cls, score = lines[1].split(",")
        assert sid == m.sample_ids[0]
        assert cls in ("A", "B")
        assert 0.0 <= float(score) <= 1.0
