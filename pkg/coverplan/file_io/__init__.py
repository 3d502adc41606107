from .shared import smart_open_file, guess_file_type_from_file_name
from .scene_file import SCENE_SCHEMA, BUNDLED_PREFIX, load_scene, save_scene, scene_fingerprint, scene_to_dict, scene_from_dict, region_to_dict, region_from_dict
from .artifact_file import ARTIFACT_SCHEMA, write_artifact, read_artifact, artifact_to_dict, artifact_from_dict
from .report_file import write_report, read_report
