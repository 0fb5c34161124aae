import json
from pathlib import Path

from django.conf import settings
from rest_framework import serializers

from .datasets import DATASET_NAMES, dataset_descriptor
from .exceptions import ConfigError, HsifcError
from .services import BALANCE_ORDERS, RunConfig

# Clés de chemin résolues relativement au dossier du fichier de configuration
PATH_KEYS = ('cube', 'gt', 'csv', 'data_dir', 'out')


class RunConfigSerializer(serializers.Serializer):
    """Serializer pour les fichiers de configuration d'exécution (JSON)"""
    dataset = serializers.CharField(required=False, allow_null=True)
    cube = serializers.CharField(required=False, allow_null=True)
    gt = serializers.CharField(required=False, allow_null=True)
    csv = serializers.CharField(required=False, allow_null=True)
    data_dir = serializers.CharField(required=False, allow_null=True)
    test_fraction = serializers.FloatField(default=lambda: settings.HSIFC_TEST_FRACTION)
    balance = serializers.BooleanField(default=True)
    balance_order = serializers.ChoiceField(choices=BALANCE_ORDERS, default='post_split')
    i_understand_leakage = serializers.BooleanField(default=False)
    hidden_sizes = serializers.ListField(
        child=serializers.IntegerField(min_value=1), required=False, allow_null=True, min_length=1
    )
    epochs = serializers.IntegerField(min_value=0, default=lambda: settings.HSIFC_EPOCHS)
    batch_size = serializers.IntegerField(min_value=2, default=lambda: settings.HSIFC_BATCH_SIZE)
    learning_rate = serializers.FloatField(default=lambda: settings.HSIFC_LEARNING_RATE)
    bands = serializers.ListField(
        child=serializers.IntegerField(min_value=0), required=False, allow_null=True, min_length=1
    )
    band_k = serializers.IntegerField(min_value=1, required=False, allow_null=True)
    seed = serializers.IntegerField(min_value=0, default=lambda: settings.HSIFC_SEED)
    repeats = serializers.IntegerField(min_value=1, default=30)
    out = serializers.CharField(required=False, allow_null=True)

    def validate_dataset(self, value):
        """Vérifier que le jeu de données est enregistré"""
        if value is None:
            return value
        try:
            return dataset_descriptor(value).name
        except HsifcError:
            raise serializers.ValidationError(
                f"Jeu de données inconnu '{value}' (attendu : {', '.join(DATASET_NAMES)})"
            )

    def validate_test_fraction(self, value):
        if not 0 < value < 1:
            raise serializers.ValidationError("test_fraction doit être strictement entre 0 et 1.")
        return value

    def validate_learning_rate(self, value):
        if value <= 0:
            raise serializers.ValidationError("learning_rate doit être strictement positif.")
        return value

    def validate(self, data):
        """Vérifications croisées : source de données, ordre d'équilibrage, bandes"""
        unknown = sorted(set(self.initial_data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError(f"Clés inconnues : {', '.join(unknown)}")

        has_csv = bool(data.get('csv'))
        has_cube = bool(data.get('cube')) or bool(data.get('gt'))
        if has_csv and has_cube:
            raise serializers.ValidationError("Indiquez soit un CSV, soit un couple cube/gt, pas les deux.")
        if has_cube and not (data.get('cube') and data.get('gt')):
            raise serializers.ValidationError("cube et gt doivent être fournis ensemble.")
        if not (has_csv or has_cube or data.get('dataset')):
            raise serializers.ValidationError("Aucune source de données : dataset, cube/gt ou csv est requis.")

        if data.get('balance_order') == 'pre_split_unsafe' and not data.get('i_understand_leakage'):
            raise serializers.ValidationError(
                "balance_order pre_split_unsafe exige i_understand_leakage (fuite des pixels de test)."
            )
        if data.get('bands') and data.get('band_k'):
            raise serializers.ValidationError("bands et band_k sont exclusifs.")
        if data.get('bands') and len(set(data['bands'])) != len(data['bands']):
            raise serializers.ValidationError("La liste de bandes contient des doublons.")
        return data

    def create(self, validated_data):
        """Construire la RunConfig"""
        return RunConfig(**validated_data)


def format_errors(errors, prefix=''):
    """Aplatit les erreurs DRF en 'champ: message; ...'"""
    parts = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            label = '' if key == 'non_field_errors' else f"{prefix}{key}"
            parts.append(format_errors(value, f"{label}: " if label else prefix))
    elif isinstance(errors, list):
        parts.extend(format_errors(value, prefix) for value in errors)
    else:
        return f"{prefix}{errors}"
    return '; '.join(part for part in parts if part)


def read_config_file(path):
    """Lit un fichier JSON de configuration ; les chemins relatifs partent de son dossier"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier de configuration introuvable : {path}")
    try:
        with open(path, 'r', encoding='utf-8') as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration JSON invalide ({path}) : {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"La configuration {path} doit être un objet JSON")

    for key in PATH_KEYS:
        if raw.get(key) and not Path(raw[key]).is_absolute():
            raw[key] = str((path.parent / raw[key]).resolve())
    return raw


def load_run_config(config_path=None, overrides=None) -> RunConfig:
    """Priorité : flags (`overrides`) > fichier > valeurs par défaut des settings"""
    data = read_config_file(config_path) if config_path else {}
    data.update({key: value for key, value in (overrides or {}).items() if value is not None})

    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid():
        raise ConfigError(f"Configuration invalide : {format_errors(serializer.errors)}")
    return serializer.save()
