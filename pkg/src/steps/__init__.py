"""
Pipeline steps: one step per mode stage and one battery per verified module.
"""
