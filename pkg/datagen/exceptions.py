class DatagenError(Exception):
    """Base class of every error raised by the dataset generator."""


class InvalidGeometry(DatagenError, ValueError):
    pass


# メッシュの読み込み・生成のエラー

class MeshError(DatagenError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = 'line {}: {}'.format(line, message)
        super().__init__(message)


class MalformedNumber(MeshError):
    pass


class IndexOutOfRange(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class EmptyMesh(MeshError):
    pass


class NonPositiveExtent(MeshError, ValueError):
    pass


# シーンのサンプリングのエラー

class TooCrowded(DatagenError):
    pass


class DegenerateLookAt(DatagenError):
    pass


class SceneUnsatisfiable(DatagenError):
    def __init__(self, image_index, retries):
        self.image_index = image_index
        self.retries = retries
        super().__init__(
            'image {}: no valid placement after {} retries'.format(image_index, retries)
        )


# アノテーションのエラー

class EmptyMask(DatagenError):
    pass


class BadRle(DatagenError):
    pass


class DuplicateFileName(DatagenError):
    pass


class IdOverflow(DatagenError):
    pass


# シーン定義ファイル・入出力のエラー

class SpecError(DatagenError):
    pass


class SpecParseError(SpecError):
    def __init__(self, message, line, column, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = '{}:{}:{}'.format(path, line, column) if path else 'line {} column {}'.format(line, column)
        super().__init__('{}: {}'.format(where, message))


class SpecValidationError(SpecError):
    def __init__(self, errors, path=None):
        self.errors = errors
        self.path = path
        prefix = '{}: '.format(path) if path else ''
        super().__init__(prefix + '; '.join(flatten_errors(errors)))


class IoFailure(DatagenError):
    pass


def flatten_errors(errors, prefix=''):
    """Turn a nested serializer error structure into 'field.path: message' lines."""
    if isinstance(errors, dict):
        lines = []
        for key, value in errors.items():
            name = str(key) if key != 'non_field_errors' else ''
            path = '.'.join(part for part in (prefix, name) if part)
            lines.extend(flatten_errors(value, path))
        return lines
    if isinstance(errors, (list, tuple)):
        lines = []
        for i, value in enumerate(errors):
            if isinstance(value, (dict, list, tuple)):
                if value:
                    lines.extend(flatten_errors(value, '{}[{}]'.format(prefix, i)))
            else:
                lines.extend(flatten_errors(value, prefix))
        return lines
    return ['{}: {}'.format(prefix, errors) if prefix else str(errors)]
